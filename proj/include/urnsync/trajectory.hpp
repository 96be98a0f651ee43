#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "urnsync/model.hpp"
#include "urnsync/random.hpp"

namespace urnsync {

/// Fill `out` with the draws U(t+1, i) that move the system from t to t+1.
inline void draw_step_uniforms(const UniformSource& source, std::uint64_t replica, std::uint64_t t,
                               std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = source.uniform(replica, t + 1, i);
}

/// Sorted, de-duplicated set of times at which a trajectory is recorded.
class RecordSchedule {
public:
  RecordSchedule() = default;
  explicit RecordSchedule(std::vector<std::uint64_t> times) : times_{std::move(times)} {
    std::sort(times_.begin(), times_.end());
    times_.erase(std::unique(times_.begin(), times_.end()), times_.end());
  }

  /// 0, k, 2k, ... and always the horizon itself.
  static RecordSchedule every(std::uint64_t k, std::uint64_t horizon) {
    if (k == 0) throw std::invalid_argument("record stride must be >= 1");
    std::vector<std::uint64_t> ts;
    for (std::uint64_t t = 0; t <= horizon; t += k) ts.push_back(t);
    ts.push_back(horizon);
    return RecordSchedule{std::move(ts)};
  }

  /// Roughly `per_decade` log-spaced times in [1, horizon], plus 0.
  static RecordSchedule log_spaced(std::uint64_t horizon, unsigned per_decade) {
    if (per_decade == 0) throw std::invalid_argument("per_decade must be >= 1");
    std::vector<std::uint64_t> ts{0};
    if (horizon >= 1) {
      const double decades = std::log10(static_cast<double>(horizon));
      const auto n = static_cast<std::uint64_t>(std::ceil(decades * per_decade));
      for (std::uint64_t k = 0; k <= n; ++k) {
        const double t = std::pow(10.0, decades * static_cast<double>(k) / static_cast<double>(std::max<std::uint64_t>(n, 1)));
        ts.push_back(std::min<std::uint64_t>(horizon, static_cast<std::uint64_t>(std::llround(t))));
      }
    }
    return RecordSchedule{std::move(ts)};
  }

  [[nodiscard]] const std::vector<std::uint64_t>& times() const noexcept { return times_; }
  [[nodiscard]] bool empty() const noexcept { return times_.empty(); }
  [[nodiscard]] std::uint64_t last() const { return times_.back(); }

private:
  std::vector<std::uint64_t> times_;
};

/// Summary of one recorded time of a trajectory.
struct TrajectoryPoint {
  std::uint64_t t = 0;
  double z_bar = 0;
  double z_min = 0;
  double z_max = 0;
  double spread = 0; // max_i |Z_t(i) - Z_t|

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

struct FullSnapshot {
  std::uint64_t t = 0;
  std::vector<double> z;

  friend bool operator==(const FullSnapshot&, const FullSnapshot&) = default;
};

struct TrajectoryRecord {
  std::vector<TrajectoryPoint> points;
  std::vector<FullSnapshot> full; // empty unless requested

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

[[nodiscard]] inline TrajectoryPoint summarize(const SystemState& s, const ModelParams& p) {
  const auto [lo, hi] = std::minmax_element(s.red_counts.begin(), s.red_counts.end());
  const auto balls = static_cast<double>(s.balls(p));
  TrajectoryPoint pt;
  pt.t = s.t;
  pt.z_bar = s.mean_fraction(p);
  pt.z_min = static_cast<double>(*lo) / balls;
  pt.z_max = static_cast<double>(*hi) / balls;
  pt.spread = std::max(pt.z_max - pt.z_bar, pt.z_bar - pt.z_min);
  return pt;
}

struct RecordPolicy {
  RecordSchedule schedule;
  bool full_vectors = false;
};

/// Simulate one replica to `horizon`, recording at the scheduled times that
/// fall within [0, horizon].
[[nodiscard]] inline TrajectoryRecord run_trajectory(const ModelParams& p, std::uint64_t horizon,
                                                     const UniformSource& source,
                                                     std::uint64_t replica,
                                                     const RecordPolicy& policy) {
  TrajectoryRecord rec;
  SystemState s = init_system(p);
  std::vector<double> u(p.n_urns());
  const auto& times = policy.schedule.times();
  auto next = times.begin();
  auto record = [&] {
    while (next != times.end() && *next < s.t) ++next;
    if (next != times.end() && *next == s.t) {
      rec.points.push_back(summarize(s, p));
      if (policy.full_vectors) rec.full.push_back({s.t, s.fractions(p)});
      ++next;
    }
  };
  record();
  while (s.t < horizon) {
    draw_step_uniforms(source, replica, s.t, u);
    advance(s, p, u);
    record();
  }
  return rec;
}

} // namespace urnsync
