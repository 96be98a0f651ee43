#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace urnsync {

/// Mergeable one-pass accumulator of count, mean and central moments up to
/// fourth order (Welford / Chan / Pebay update formulas).
///
/// merge(a, b) and merge(b, a) produce bit-identical results: every term is
/// written so that swapping the operands only flips signs in pairs.
class StreamingStats {
public:
  void push(double value) noexcept {
    const double n1 = static_cast<double>(n_);
    ++n_;
    const double n = static_cast<double>(n_);
    const double delta = value - mean_;
    const double delta_n = delta / n;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * n1;
    mean_ += delta_n;
    m4_ += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2_ - 4.0 * delta_n * m3_;
    m3_ += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2_;
    m2_ += term1;
  }

  void merge(const StreamingStats& other) noexcept { *this = merged(*this, other); }

  [[nodiscard]] static StreamingStats merged(const StreamingStats& a, const StreamingStats& b) noexcept {
    if (a.n_ == 0) return b;
    if (b.n_ == 0) return a;
    const double na = static_cast<double>(a.n_);
    const double nb = static_cast<double>(b.n_);
    const double n = na + nb;
    const double delta = b.mean_ - a.mean_;
    const double delta2 = delta * delta;
    const double nab = na * nb;

    StreamingStats r;
    r.n_ = a.n_ + b.n_;
    r.mean_ = (na * a.mean_ + nb * b.mean_) / n;
    r.m2_ = (a.m2_ + b.m2_) + delta2 * nab / n;
    r.m3_ = (a.m3_ + b.m3_) + delta * delta2 * nab * (na - nb) / (n * n) +
            3.0 * delta * (na * b.m2_ - nb * a.m2_) / n;
    r.m4_ = (a.m4_ + b.m4_) + delta2 * delta2 * nab * (na * na - nab + nb * nb) / (n * n * n) +
            6.0 * delta2 * (na * na * b.m2_ + nb * nb * a.m2_) / (n * n) +
            4.0 * delta * (na * b.m3_ - nb * a.m3_) / n;
    return r;
  }

  [[nodiscard]] std::uint64_t count() const noexcept { return n_; }
  [[nodiscard]] double mean() const noexcept { return n_ ? mean_ : nan(); }
  [[nodiscard]] double sum_sq_dev() const noexcept { return m2_; }

  /// Unbiased (n - 1) variance.
  [[nodiscard]] double variance() const noexcept {
    return n_ < 2 ? nan() : m2_ / static_cast<double>(n_ - 1);
  }
  [[nodiscard]] double population_variance() const noexcept {
    return n_ < 1 ? nan() : m2_ / static_cast<double>(n_);
  }
  [[nodiscard]] double stddev() const noexcept { return std::sqrt(variance()); }

  /// Standard error of the mean.
  [[nodiscard]] double mean_stderr() const noexcept {
    return n_ < 2 ? nan() : std::sqrt(variance() / static_cast<double>(n_));
  }

  /// Standard error of the unbiased variance, from the sample fourth moment:
  /// Var(s^2) ~ (mu4 - sigma^4 (n-3)/(n-1)) / n.
  [[nodiscard]] double variance_stderr() const noexcept {
    if (n_ < 4) return nan();
    const double n = static_cast<double>(n_);
    const double mu4 = m4_ / n;
    const double s2 = variance();
    const double var_s2 = (mu4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n;
    return std::sqrt(std::max(var_s2, 0.0));
  }

  /// Sample skewness g1 = sqrt(n) M3 / M2^{3/2}.
  [[nodiscard]] double skewness() const noexcept {
    if (n_ < 3 || m2_ <= 0.0) return nan();
    return std::sqrt(static_cast<double>(n_)) * m3_ / std::pow(m2_, 1.5);
  }

  /// Sample excess kurtosis g2 = n M4 / M2^2 - 3.
  [[nodiscard]] double excess_kurtosis() const noexcept {
    if (n_ < 4 || m2_ <= 0.0) return nan();
    return static_cast<double>(n_) * m4_ / (m2_ * m2_) - 3.0;
  }

  friend bool operator==(const StreamingStats&, const StreamingStats&) = default;

private:
  static constexpr double nan() noexcept { return std::numeric_limits<double>::quiet_NaN(); }

  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double m3_ = 0.0;
  double m4_ = 0.0;
};

/// A named set of StreamingStats sharing one schema.
class TrackedStats {
public:
  TrackedStats() = default;
  explicit TrackedStats(std::vector<std::string> names)
      : names_{std::move(names)}, stats_(names_.size()) {}

  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
  [[nodiscard]] std::size_t size() const noexcept { return stats_.size(); }

  StreamingStats& operator[](std::size_t k) { return stats_.at(k); }
  const StreamingStats& operator[](std::size_t k) const { return stats_.at(k); }

  [[nodiscard]] const StreamingStats& at(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw std::out_of_range("no tracked scalar named '" + name + "'");
    return stats_[static_cast<std::size_t>(it - names_.begin())];
  }

  void merge(const TrackedStats& other) {
    if (other.names_ != names_) throw std::invalid_argument("merge_stats: tracked-scalar schema mismatch");
    for (std::size_t k = 0; k < stats_.size(); ++k) stats_[k].merge(other.stats_[k]);
  }

  friend bool operator==(const TrackedStats&, const TrackedStats&) = default;

private:
  std::vector<std::string> names_;
  std::vector<StreamingStats> stats_;
};

[[nodiscard]] inline StreamingStats merge_stats(const StreamingStats& a, const StreamingStats& b) noexcept {
  return StreamingStats::merged(a, b);
}

[[nodiscard]] inline TrackedStats merge_stats(const TrackedStats& a, const TrackedStats& b) {
  TrackedStats r = a;
  r.merge(b);
  return r;
}

/// Mergeable co-moment matrix of a fixed-dimension vector sample.
class CoMoments {
public:
  CoMoments() = default;
  explicit CoMoments(std::size_t dim) : dim_{dim}, mean_(dim, 0.0), c_(dim * dim, 0.0) {}

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::uint64_t count() const noexcept { return n_; }

  void push(std::span<const double> v) {
    if (v.size() != dim_) throw std::invalid_argument("CoMoments: dimension mismatch");
    ++n_;
    const double n = static_cast<double>(n_);
    std::vector<double> before(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      before[i] = v[i] - mean_[i];
      mean_[i] += before[i] / n;
    }
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) c_[i * dim_ + j] += before[i] * (v[j] - mean_[j]);
  }

  void merge(const CoMoments& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    if (other.dim_ != dim_) throw std::invalid_argument("CoMoments: dimension mismatch");
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double n = na + nb;
    std::vector<double> delta(dim_);
    for (std::size_t i = 0; i < dim_; ++i) delta[i] = other.mean_[i] - mean_[i];
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j)
        c_[i * dim_ + j] = (c_[i * dim_ + j] + other.c_[i * dim_ + j]) + delta[i] * delta[j] * na * nb / n;
    for (std::size_t i = 0; i < dim_; ++i) mean_[i] = (na * mean_[i] + nb * other.mean_[i]) / n;
    n_ += other.n_;
  }

  [[nodiscard]] double covariance(std::size_t i, std::size_t j) const {
    return n_ < 2 ? std::numeric_limits<double>::quiet_NaN() : c_.at(i * dim_ + j) / static_cast<double>(n_ - 1);
  }

  [[nodiscard]] double correlation(std::size_t i, std::size_t j) const {
    const double d = std::sqrt(c_.at(i * dim_ + i) * c_.at(j * dim_ + j));
    return d > 0.0 ? c_.at(i * dim_ + j) / d : std::numeric_limits<double>::quiet_NaN();
  }

private:
  std::size_t dim_ = 0;
  std::uint64_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> c_;
};

/// Kolmogorov-Smirnov distance sup |F_n - F| between the empirical CDF of
/// `samples` and a continuous reference CDF.
template <class Cdf>
[[nodiscard]] double ks_distance(std::vector<double> samples, Cdf&& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double di = static_cast<double>(i);
    d = std::max({d, (di + 1.0) / n - f, f - di / n});
  }
  return d;
}

[[nodiscard]] inline double ks_distance_uniform(std::vector<double> samples) {
  return ks_distance(std::move(samples), [](double x) { return std::clamp(x, 0.0, 1.0); });
}

} // namespace urnsync
