#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "urnsync/model.hpp"

namespace urnsync {

enum class RegimeLabel { subcritical, critical, supercritical };

[[nodiscard]] inline const char* to_string(RegimeLabel r) noexcept {
  switch (r) {
  case RegimeLabel::subcritical: return "subcritical";
  case RegimeLabel::critical: return "critical";
  case RegimeLabel::supercritical: return "supercritical";
  }
  return "?";
}

/// Predicted decay of E[(Z_t(i) - Z_t)^2]: t^(-2 alpha) below 1/2,
/// t^(-1) log t at 1/2, t^(-1) above.
struct Regime {
  RegimeLabel label;
  double exponent;       // power of t in the predicted rate
  bool log_correction;   // true only at the critical point
  std::string predicted_rate;
};

inline constexpr double critical_alpha_tolerance = 1e-12;

[[nodiscard]] inline Regime classify_regime(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0,1]");
  if (std::abs(alpha - 0.5) <= critical_alpha_tolerance)
    return {RegimeLabel::critical, -1.0, true, "t^(-1)*log(t)"};
  if (alpha < 0.5) {
    std::ostringstream os;
    os << "t^(" << -2.0 * alpha << ")";
    return {RegimeLabel::subcritical, -2.0 * alpha, false, os.str()};
  }
  return {RegimeLabel::supercritical, -1.0, false, "t^(-1)"};
}

struct SeriesPoint {
  double t;
  double value;
};

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::pair<double, double> window{0.0, 0.0};
  std::size_t n_points = 0;
};

/// Ordinary least squares of log(value) on log(t) over points with t in
/// [window.first, window.second].
[[nodiscard]] inline ExponentFit fit_power_law(const std::vector<SeriesPoint>& series,
                                               std::pair<double, double> window) {
  double sx = 0, sy = 0;
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : series) {
    if (p.t < window.first || p.t > window.second) continue;
    if (!(p.value > 0.0) || !(p.t > 0.0))
      throw std::domain_error("fit_power_law: values and times in the window must be positive");
    pts.emplace_back(std::log(p.t), std::log(p.value));
  }
  if (pts.empty()) throw std::invalid_argument("fit_power_law: empty window");
  if (pts.size() < 10) throw std::invalid_argument("fit_power_law: fewer than 10 points in window");
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
  }
  const double n = static_cast<double>(pts.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_power_law: window holds a single distinct time");
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? std::min(1.0, sxy * sxy / (sxx * syy)) : 1.0;
  fit.window = window;
  fit.n_points = pts.size();
  return fit;
}

/// Pick ~per_decade log-spaced samples of a dense series x[0..T] within
/// [t_lo, t_hi].
[[nodiscard]] inline std::vector<SeriesPoint> log_subsample(const std::vector<double>& dense, std::uint64_t t_lo,
                                                            std::uint64_t t_hi, unsigned per_decade = 50) {
  if (t_lo < 1 || t_hi < t_lo || t_hi >= dense.size())
    throw std::invalid_argument("log_subsample: window outside series");
  std::vector<SeriesPoint> out;
  const double lo = std::log10(static_cast<double>(t_lo));
  const double hi = std::log10(static_cast<double>(t_hi));
  const auto n = static_cast<std::uint64_t>(std::ceil((hi - lo) * per_decade));
  std::uint64_t last = 0;
  for (std::uint64_t k = 0; k <= n; ++k) {
    const double e = n ? lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n) : lo;
    auto t = static_cast<std::uint64_t>(std::llround(std::pow(10.0, e)));
    t = std::clamp(t, t_lo, t_hi);
    if (!out.empty() && t == last) continue;
    out.push_back({static_cast<double>(t), dense[t]});
    last = t;
  }
  return out;
}

/// Per-decade means of t * x_t / log t.
struct CriticalDiagnostic {
  std::vector<std::pair<double, double>> decades; // [lo, hi) bounds
  std::vector<double> ratio_means;
  double last_change = 0.0; // |r_last - r_prev| / r_prev
  bool bounded = false;     // last_change <= threshold
  bool increasing = false;  // ratio strictly increasing across decades
};

inline constexpr double critical_bounded_threshold = 0.10;

/// Decades are [10^k, 10^(k+1)) fully covered by the series; the last one
/// is closed on the right so a series ending at 10^K counts the endpoint.
[[nodiscard]] inline CriticalDiagnostic critical_diagnostic(const std::vector<SeriesPoint>& series,
                                                            double threshold = critical_bounded_threshold) {
  if (series.empty()) throw std::invalid_argument("critical_diagnostic: empty series");
  double t_min = series.front().t, t_max = series.front().t;
  for (const auto& p : series) {
    t_min = std::min(t_min, p.t);
    t_max = std::max(t_max, p.t);
  }
  const int k_lo = static_cast<int>(std::ceil(std::log10(std::max(t_min, 2.0)) - 1e-12));
  const int k_hi = static_cast<int>(std::floor(std::log10(t_max) + 1e-12));
  if (k_hi - k_lo < 3) throw std::invalid_argument("critical_diagnostic: series must cover >= 3 decades");

  CriticalDiagnostic d;
  for (int k = k_lo; k < k_hi; ++k) {
    const double lo = std::pow(10.0, k), hi = std::pow(10.0, k + 1);
    const bool last = (k + 1 == k_hi);
    double sum = 0;
    std::size_t count = 0;
    for (const auto& p : series) {
      if (p.t < lo || p.t > hi || (!last && p.t == hi)) continue;
      sum += p.t * p.value / std::log(p.t);
      ++count;
    }
    if (count == 0) throw std::invalid_argument("critical_diagnostic: empty decade");
    d.decades.emplace_back(lo, hi);
    d.ratio_means.push_back(sum / static_cast<double>(count));
  }
  const auto n = d.ratio_means.size();
  d.last_change = std::abs(d.ratio_means[n - 1] - d.ratio_means[n - 2]) / d.ratio_means[n - 2];
  d.bounded = d.last_change <= threshold;
  d.increasing = true;
  for (std::size_t k = 1; k < n; ++k) d.increasing = d.increasing && d.ratio_means[k] > d.ratio_means[k - 1];
  return d;
}

/// Partial sums S_T = sum_{t<T} alpha sqrt(x_t) / (t+m+1), the summable
/// bound on the expected drift of Z_t(i).
struct QuasiMartingaleSum {
  std::vector<double> partial_sums; // S_0 = 0, ..., S_T
  double total = 0.0;
  double tail_increment = 0.0;      // S_T - S_{T/10}
  double tail_fraction = 0.0;       // tail_increment / total (0 when total is 0)
  std::vector<double> decade_increments; // S_{10^{k+1}} - S_{10^k}, k = 0, 1, ...
};

[[nodiscard]] inline QuasiMartingaleSum quasi_martingale_sum(const ModelParams& p, std::uint64_t horizon,
                                                             const std::vector<double>& x_sequence) {
  if (x_sequence.size() < horizon)
    throw std::invalid_argument("quasi_martingale_sum: x_sequence shorter than horizon");
  const double alpha = p.alpha();
  const double m = static_cast<double>(p.total_init());
  QuasiMartingaleSum q;
  q.partial_sums.reserve(horizon + 1);
  q.partial_sums.push_back(0.0);
  double s = 0.0, c = 0.0; // Kahan
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const double term = alpha * std::sqrt(std::max(x_sequence[t], 0.0)) / (static_cast<double>(t) + m + 1.0);
    const double y = term - c;
    const double next = s + y;
    c = (next - s) - y;
    s = next;
    q.partial_sums.push_back(s);
  }
  q.total = s;
  q.tail_increment = s - q.partial_sums[horizon / 10];
  q.tail_fraction = q.total > 0.0 ? q.tail_increment / q.total : 0.0;
  for (std::uint64_t lo = 1; lo * 10 <= horizon; lo *= 10)
    q.decade_increments.push_back(q.partial_sums[lo * 10] - q.partial_sums[lo]);
  return q;
}

} // namespace urnsync
