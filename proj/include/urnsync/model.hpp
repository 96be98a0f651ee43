#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace urnsync {

/// Parameters of N mean-field interacting Polya urns. Each urn starts with
/// `red_init` red and `white_init` white balls; at every step urn i gains a
/// red ball with probability alpha * mean(Z) + (1 - alpha) * Z(i), otherwise
/// a white one.
class ModelParams {
public:
  ModelParams(std::size_t n_urns, std::int64_t red_init, std::int64_t white_init, double alpha)
      : n_urns_{n_urns}, red_init_{red_init}, white_init_{white_init}, alpha_{alpha} {
    if (n_urns_ < 1) throw std::invalid_argument("n_urns must be >= 1");
    if (red_init_ < 1) throw std::invalid_argument("red_init must be >= 1");
    if (white_init_ < 1) throw std::invalid_argument("white_init must be >= 1");
    // also rejects NaN
    if (!(alpha_ >= 0.0 && alpha_ <= 1.0)) throw std::invalid_argument("alpha must lie in [0,1]");
  }

  [[nodiscard]] std::size_t n_urns() const noexcept { return n_urns_; }
  [[nodiscard]] std::int64_t red_init() const noexcept { return red_init_; }
  [[nodiscard]] std::int64_t white_init() const noexcept { return white_init_; }
  [[nodiscard]] double alpha() const noexcept { return alpha_; }
  [[nodiscard]] std::int64_t total_init() const noexcept { return red_init_ + white_init_; }

  /// a/m, the expected red fraction at every time.
  [[nodiscard]] double mean_fraction() const noexcept {
    return static_cast<double>(red_init_) / static_cast<double>(total_init());
  }
  /// a/m - a^2/m^2, the variance of one Bernoulli(a/m) draw.
  [[nodiscard]] double bernoulli_variance() const noexcept {
    const double p = mean_fraction();
    return p - p * p;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
  std::size_t n_urns_;
  std::int64_t red_init_;
  std::int64_t white_init_;
  double alpha_;
};

/// Markov state of the urn system: time plus per-urn red-ball counts.
/// Counts are the source of truth; fractions are derived on demand.
struct SystemState {
  std::uint64_t t = 0;
  std::vector<std::int64_t> red_counts;

  [[nodiscard]] std::size_t size() const noexcept { return red_counts.size(); }

  /// Balls per urn at time t (t + m).
  [[nodiscard]] std::int64_t balls(const ModelParams& p) const noexcept {
    return static_cast<std::int64_t>(t) + p.total_init();
  }

  [[nodiscard]] double fraction(const ModelParams& p, std::size_t i) const {
    return static_cast<double>(red_counts.at(i)) / static_cast<double>(balls(p));
  }

  [[nodiscard]] std::vector<double> fractions(const ModelParams& p) const {
    std::vector<double> z(red_counts.size());
    const auto denom = static_cast<double>(balls(p));
    std::transform(red_counts.begin(), red_counts.end(), z.begin(),
                   [denom](std::int64_t x) { return static_cast<double>(x) / denom; });
    return z;
  }

  [[nodiscard]] std::int64_t total_red() const noexcept {
    return std::accumulate(red_counts.begin(), red_counts.end(), std::int64_t{0});
  }

  /// Z_t = (1/N) sum_i Z_t(i), computed from the integer total.
  [[nodiscard]] double mean_fraction(const ModelParams& p) const noexcept {
    return static_cast<double>(total_red()) /
           (static_cast<double>(red_counts.size()) * static_cast<double>(balls(p)));
  }

  friend bool operator==(const SystemState&, const SystemState&) = default;
};

[[nodiscard]] inline SystemState init_system(const ModelParams& p) {
  return SystemState{0, std::vector<std::int64_t>(p.n_urns(), p.red_init())};
}

namespace detail {

inline void check_shape(const SystemState& s, const ModelParams& p) {
  if (s.size() != p.n_urns())
    throw std::invalid_argument("state holds " + std::to_string(s.size()) + " urns, params expect " +
                                std::to_string(p.n_urns()));
}

} // namespace detail

/// alpha * Z_t + (1 - alpha) * Z_t(i) for a 0-based urn index.
[[nodiscard]] inline double reinforcement_probability(const SystemState& s, const ModelParams& p,
                                                      std::size_t i) {
  detail::check_shape(s, p);
  if (i >= s.size())
    throw std::out_of_range("urn index " + std::to_string(i) + " out of range [0, " +
                            std::to_string(s.size()) + ")");
  return p.alpha() * s.mean_fraction(p) + (1.0 - p.alpha()) * s.fraction(p, i);
}

/// In-place update: urn i gains a red ball iff uniforms[i] <= its
/// reinforcement probability.
inline void advance(SystemState& s, const ModelParams& p, std::span<const double> uniforms) {
  detail::check_shape(s, p);
  if (uniforms.size() != s.size())
    throw std::invalid_argument("expected " + std::to_string(s.size()) + " uniforms, got " +
                                std::to_string(uniforms.size()));
  const auto balls = static_cast<double>(s.balls(p));
  const double z_bar = s.mean_fraction(p);
  const double alpha = p.alpha();
  const double shared = alpha * z_bar;
  // same arithmetic as reinforcement_probability, so thresholds agree bitwise
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double prob = shared + (1.0 - alpha) * (static_cast<double>(s.red_counts[i]) / balls);
    s.red_counts[i] += uniforms[i] <= prob ? 1 : 0;
  }
  ++s.t;
}

[[nodiscard]] inline SystemState step(SystemState s, const ModelParams& p,
                                      std::span<const double> uniforms) {
  advance(s, p, uniforms);
  return s;
}

} // namespace urnsync
