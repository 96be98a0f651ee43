#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "urnsync/model.hpp"
#include "urnsync/parallel.hpp"
#include "urnsync/random.hpp"
#include "urnsync/stats.hpp"
#include "urnsync/trajectory.hpp"

namespace urnsync {

/// Raised when N * R * T exceeds the configured budget without override.
class BudgetExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace estimator {
inline constexpr unsigned z_mean = 1u << 0;
inline constexpr unsigned x_hat = 1u << 1;
inline constexpr unsigned v_hat = 1u << 2;
inline constexpr unsigned spread_mean = 1u << 3;
inline constexpr unsigned abs_dev_mean = 1u << 4;
inline constexpr unsigned w_moments = 1u << 5;
inline constexpr unsigned all = (1u << 6) - 1;
} // namespace estimator

/// Default ceiling on urn-steps (N * R * T) per ensemble.
inline constexpr double default_budget = 1e10;

struct EnsembleSpec {
  ModelParams params;
  std::uint64_t replicas = 1;
  std::uint64_t horizon = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> record_times;
  unsigned estimators = estimator::all;
  unsigned threads = 1;
  double budget = default_budget;
  bool budget_override = false;
};

struct EstimateRow {
  std::uint64_t t = 0;
  std::string estimator;
  double value = 0.0;
  double std_error = 0.0; // NaN when undefined (fewer than 2 replicas)
  std::uint64_t n_samples = 0;

  friend bool operator==(const EstimateRow& a, const EstimateRow& b) {
    auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return a.t == b.t && a.estimator == b.estimator && same(a.value, b.value) &&
           same(a.std_error, b.std_error) && a.n_samples == b.n_samples;
  }
};

struct EnsembleEstimates {
  std::vector<EstimateRow> rows;
  bool std_error_defined = true;

  [[nodiscard]] const EstimateRow& get(std::uint64_t t, const std::string& name) const {
    const auto it = std::find_if(rows.begin(), rows.end(),
                                 [&](const EstimateRow& r) { return r.t == t && r.estimator == name; });
    if (it == rows.end()) throw std::out_of_range("no estimate '" + name + "' at t=" + std::to_string(t));
    return *it;
  }

  friend bool operator==(const EnsembleEstimates&, const EnsembleEstimates&) = default;
};

/// Per-replica observables tracked at each recorded time.
inline const std::vector<std::string>& replica_observables() {
  static const std::vector<std::string> names{"z_bar", "dispersion", "spread", "abs_dev", "w"};
  return names;
}

/// Observables of one system state, in replica_observables() order.
[[nodiscard]] inline std::vector<double> observe(const SystemState& s, const ModelParams& p) {
  const auto balls = static_cast<double>(s.balls(p));
  const double z_bar = s.mean_fraction(p);
  const double n = static_cast<double>(s.size());
  double sq = 0.0, abs_dev = 0.0, spread = 0.0;
  for (auto c : s.red_counts) {
    const double d = static_cast<double>(c) / balls - z_bar;
    sq += d * d;
    abs_dev += std::abs(d);
    spread = std::max(spread, std::abs(d));
  }
  return {z_bar, sq / n, spread, abs_dev / n, std::sqrt(n) * (z_bar - p.mean_fraction())};
}

inline void validate(const EnsembleSpec& spec) {
  if (spec.replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  for (auto t : spec.record_times)
    if (t > spec.horizon)
      throw std::invalid_argument("record time " + std::to_string(t) + " exceeds horizon " +
                                  std::to_string(spec.horizon));
  const double work = static_cast<double>(spec.params.n_urns()) * static_cast<double>(spec.replicas) *
                      static_cast<double>(spec.horizon);
  if (!spec.budget_override && work > spec.budget)
    throw BudgetExceeded("N*R*T = " + std::to_string(work) + " urn-steps exceeds budget " +
                         std::to_string(spec.budget) + "; pass --budget-override to run anyway");
}

/// Simulate replicas [begin, end) and accumulate their observables at each
/// recorded time. `times` must be sorted.
[[nodiscard]] inline std::vector<TrackedStats> simulate_replica_block(const ModelParams& p,
                                                                      const std::vector<std::uint64_t>& times,
                                                                      const UniformSource& source,
                                                                      std::size_t begin, std::size_t end) {
  std::vector<TrackedStats> acc(times.size(), TrackedStats{replica_observables()});
  std::vector<double> u(p.n_urns());
  for (std::size_t r = begin; r < end; ++r) {
    SystemState s = init_system(p);
    for (std::size_t k = 0; k < times.size(); ++k) {
      while (s.t < times[k]) {
        draw_step_uniforms(source, r, s.t, u);
        advance(s, p, u);
      }
      const auto obs = observe(s, p);
      for (std::size_t j = 0; j < obs.size(); ++j) acc[k][j].push(obs[j]);
    }
  }
  return acc;
}

/// Run R independent trajectories (replica index r draws U at addresses
/// (seed, r, t, i)) and estimate ensemble moments at each recorded time.
/// Output is bit-identical for any thread count.
[[nodiscard]] inline EnsembleEstimates run_replicas(const EnsembleSpec& spec) {
  validate(spec);
  const RecordSchedule schedule(spec.record_times);
  const auto& times = schedule.times();
  const UniformSource source(spec.seed);
  const auto& p = spec.params;

  auto stats = tree_reduce<std::vector<TrackedStats>>(
      spec.replicas, spec.threads,
      [&](std::size_t begin, std::size_t end) { return simulate_replica_block(p, times, source, begin, end); },
      [](const std::vector<TrackedStats>& a, const std::vector<TrackedStats>& b) {
        std::vector<TrackedStats> r = a;
        for (std::size_t k = 0; k < r.size(); ++k) r[k].merge(b[k]);
        return r;
      });

  EnsembleEstimates out;
  out.std_error_defined = spec.replicas >= 2;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto& st = stats[k];
    const auto t = times[k];
    const auto& z = st.at("z_bar");
    const std::uint64_t r = z.count();
    auto add = [&](const char* name, double value, double se, std::uint64_t n) {
      out.rows.push_back({t, name, value, se, n});
    };
    if (spec.estimators & estimator::z_mean) add("z_mean", z.mean(), z.mean_stderr(), r);
    if (spec.estimators & estimator::x_hat) {
      const auto& q = st.at("dispersion");
      add("x_hat", q.mean(), q.mean_stderr(), r * p.n_urns());
    }
    if (spec.estimators & estimator::v_hat)
      add("v_hat", r >= 2 ? z.variance() : nan, z.variance_stderr(), r);
    if (spec.estimators & estimator::spread_mean) {
      const auto& s = st.at("spread");
      add("spread_mean", s.mean(), s.mean_stderr(), r);
    }
    if (spec.estimators & estimator::abs_dev_mean) {
      const auto& a = st.at("abs_dev");
      add("abs_dev_mean", a.mean(), a.mean_stderr(), r * p.n_urns());
    }
    if (spec.estimators & estimator::w_moments) {
      const auto& w = st.at("w");
      const double rr = static_cast<double>(r);
      add("w_mean", w.mean(), w.mean_stderr(), r);
      add("w_var", w.variance(), w.variance_stderr(), r);
      add("w_skew", w.skewness(), r >= 3 ? std::sqrt(6.0 / rr) : nan, r);
      add("w_kurt", w.excess_kurtosis(), r >= 4 ? std::sqrt(24.0 / rr) : nan, r);
    }
  }
  return out;
}

} // namespace urnsync
