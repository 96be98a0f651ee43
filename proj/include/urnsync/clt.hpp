#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "urnsync/model.hpp"
#include "urnsync/moments.hpp"
#include "urnsync/parallel.hpp"
#include "urnsync/random.hpp"
#include "urnsync/stats.hpp"
#include "urnsync/trajectory.hpp"

// Large-N Gaussian approximation of W_t^N = sqrt(N) (Z_t - a/m).
//
// As N grows, W^N approaches W_{t+1} = W_t + sigma_t B_{t+1}, W_0 = 0, with
// i.i.d. standard normal B and
//
//   sigma_t^2 = [(a/m - a^2/m^2) - (1 - alpha)^2 x^inf_t] / (t+m+1)^2.
//
// For finite N, W^N alone is not Markov (the full urn vector is needed);
// the Markov property only holds in the limit.

namespace urnsync {

struct SigmaSchedule {
  std::vector<double> sigma_sq; // sigma_t^2 for t = 0..T-1

  [[nodiscard]] std::uint64_t horizon() const noexcept { return sigma_sq.size(); }

  /// sum_{s<t} sigma_s^2 for t = 0..T, the variance of the limit W_t.
  [[nodiscard]] std::vector<double> cumulative() const {
    std::vector<double> c(sigma_sq.size() + 1, 0.0);
    for (std::size_t t = 0; t < sigma_sq.size(); ++t) c[t + 1] = c[t] + sigma_sq[t];
    return c;
  }
};

/// Largest negative rounding residue tolerated before sigma_t^2 < 0 is
/// treated as a broken recursion.
inline constexpr double sigma_negative_tolerance = 1e-15;

[[nodiscard]] inline SigmaSchedule sigma_schedule(const ModelParams& p, std::uint64_t horizon) {
  if (horizon < 1) throw std::invalid_argument("sigma_schedule: horizon must be >= 1");
  const auto x_inf = limit_moments(p, horizon - 1);
  const double bv = p.bernoulli_variance();
  const double w = (1.0 - p.alpha()) * (1.0 - p.alpha());
  const double m = static_cast<double>(p.total_init());
  SigmaSchedule s;
  s.sigma_sq.reserve(horizon);
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const double d = static_cast<double>(t) + m + 1.0;
    const double value = (bv - w * x_inf[t]) / (d * d);
    if (value < -sigma_negative_tolerance)
      throw std::logic_error("sigma_t^2 = " + std::to_string(value) + " < 0 at t=" + std::to_string(t));
    s.sigma_sq.push_back(std::max(value, 0.0));
  }
  return s;
}

struct LimitPath {
  std::vector<double> w; // W_0..W_T
};

/// One path of the limiting Gauss-Markov recursion. B_{t+1} is the
/// inverse-normal-CDF transform of the open uniform at address
/// (replica, t+1, 0) on the limit_normals stream.
[[nodiscard]] inline LimitPath sample_limit_process(const SigmaSchedule& schedule, const UniformSource& source,
                                                    std::uint64_t replica) {
  LimitPath path;
  path.w.reserve(schedule.horizon() + 1);
  path.w.push_back(0.0);
  for (std::uint64_t t = 0; t < schedule.horizon(); ++t)
    path.w.push_back(path.w.back() + std::sqrt(schedule.sigma_sq[t]) * source.normal(replica, t + 1, 0));
  return path;
}

/// Per-time marginal statistics and increment co-moments of an ensemble of
/// W paths.
struct PathEnsemble {
  std::vector<StreamingStats> marginals; // W_t, t = 0..T
  CoMoments increments;                  // (W_1 - W_0, ..., W_T - W_{T-1})

  PathEnsemble() = default;
  explicit PathEnsemble(std::uint64_t horizon) : marginals(horizon + 1), increments(horizon) {}

  void push(const std::vector<double>& w) {
    for (std::size_t t = 0; t < w.size(); ++t) marginals[t].push(w[t]);
    std::vector<double> inc(w.size() - 1);
    for (std::size_t t = 0; t + 1 < w.size(); ++t) inc[t] = w[t + 1] - w[t];
    increments.push(inc);
  }

  [[nodiscard]] static PathEnsemble merged(const PathEnsemble& a, const PathEnsemble& b) {
    PathEnsemble r = a;
    for (std::size_t t = 0; t < r.marginals.size(); ++t) r.marginals[t].merge(b.marginals[t]);
    r.increments.merge(b.increments);
    return r;
  }
};

[[nodiscard]] inline PathEnsemble sample_limit_ensemble(const SigmaSchedule& schedule, std::uint64_t seed,
                                                        std::uint64_t paths, unsigned threads) {
  const UniformSource source(seed);
  return tree_reduce<PathEnsemble>(
      paths, threads,
      [&](std::size_t begin, std::size_t end) {
        PathEnsemble e(schedule.horizon());
        for (std::size_t r = begin; r < end; ++r) e.push(sample_limit_process(schedule, source, r).w);
        return e;
      },
      &PathEnsemble::merged);
}

/// W_t^N = sqrt(N) (Z_t - a/m).
[[nodiscard]] inline double empirical_w(const ModelParams& p, const SystemState& s) {
  return std::sqrt(static_cast<double>(p.n_urns())) * (s.mean_fraction(p) - p.mean_fraction());
}

/// Finite-N W^N paths W_0..W_T for replicas [begin, end).
[[nodiscard]] inline PathEnsemble simulate_w_block(const ModelParams& p, std::uint64_t horizon,
                                                   const UniformSource& source, std::size_t begin,
                                                   std::size_t end) {
  PathEnsemble e(horizon);
  std::vector<double> u(p.n_urns());
  std::vector<double> w(horizon + 1);
  for (std::size_t r = begin; r < end; ++r) {
    SystemState s = init_system(p);
    w[0] = empirical_w(p, s);
    for (std::uint64_t t = 0; t < horizon; ++t) {
      draw_step_uniforms(source, r, t, u);
      advance(s, p, u);
      w[t + 1] = empirical_w(p, s);
    }
    e.push(w);
  }
  return e;
}

struct CltThresholds {
  double variance_se_multiple = 4.0;
  double max_abs_skewness = 0.15;
  double max_abs_excess_kurtosis = 0.3;
  double correlation_se_multiple = 4.0;
  std::uint64_t min_replicas = 500;
  std::uint64_t min_urns = 500; // lowered only for deliberate small-N controls
};

struct CltConfig {
  ModelParams params;
  std::uint64_t replicas = 2000;
  std::uint64_t horizon = 20;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  CltThresholds thresholds{};
};

struct CltRow {
  std::uint64_t t = 0;
  double mean = 0, variance = 0, variance_se = 0, skewness = 0, excess_kurtosis = 0;
  double ref_finite = 0; // N v_t from the exact finite-N recursion
  double ref_limit = 0;  // sum_{s<t} sigma_s^2
  double variance_z = 0; // (variance - ref_finite) / variance_se, 0 when degenerate
  bool degenerate = false; // W_t constant across replicas (t = 0)
  bool variance_ok = true, skewness_ok = true, kurtosis_ok = true;
};

struct CltReport {
  std::vector<CltRow> rows;
  std::size_t correlation_pairs = 0;
  std::size_t correlation_exceedances = 0;
  double max_abs_correlation_z = 0;
  bool variance_ok = true;
  bool gaussian = true; // all skewness and kurtosis checks
  bool increments_ok = true;
  std::uint64_t replicas = 0;

  [[nodiscard]] bool passed() const noexcept { return variance_ok && gaussian && increments_ok; }
};

/// Simulate R independent N-urn systems and test the Gaussian limit through
/// marginal moments of W^N_t and correlations of its increments.
[[nodiscard]] inline CltReport clt_moment_test(const CltConfig& cfg) {
  const auto& p = cfg.params;
  const auto& th = cfg.thresholds;
  if (cfg.replicas < th.min_replicas)
    throw std::invalid_argument("clt_moment_test needs >= " + std::to_string(th.min_replicas) + " replicas");
  if (p.n_urns() < th.min_urns)
    throw std::invalid_argument("clt_moment_test needs >= " + std::to_string(th.min_urns) + " urns");
  if (cfg.horizon < 1) throw std::invalid_argument("clt_moment_test: horizon must be >= 1");

  const UniformSource source(cfg.seed);
  const auto ens = tree_reduce<PathEnsemble>(
      cfg.replicas, cfg.threads,
      [&](std::size_t begin, std::size_t end) { return simulate_w_block(p, cfg.horizon, source, begin, end); },
      &PathEnsemble::merged);

  const auto finite = finite_n_moments(p, cfg.horizon);
  const auto limit = sigma_schedule(p, cfg.horizon).cumulative();
  const double n = static_cast<double>(p.n_urns());

  CltReport rep;
  rep.replicas = cfg.replicas;
  for (std::uint64_t t = 0; t <= cfg.horizon; ++t) {
    const auto& st = ens.marginals[t];
    CltRow row;
    row.t = t;
    row.mean = st.mean();
    row.variance = st.variance();
    row.variance_se = st.variance_stderr();
    row.ref_finite = n * finite.v[t];
    row.ref_limit = limit[t];
    row.degenerate = !(row.variance > 0.0);
    if (row.degenerate) {
      row.skewness = row.excess_kurtosis = 0.0;
      row.variance_ok = std::abs(row.variance - row.ref_finite) <= 1e-12;
    } else {
      row.skewness = st.skewness();
      row.excess_kurtosis = st.excess_kurtosis();
      row.variance_z = (row.variance - row.ref_finite) / row.variance_se;
      row.variance_ok = std::abs(row.variance_z) <= th.variance_se_multiple;
      row.skewness_ok = std::abs(row.skewness) <= th.max_abs_skewness;
      row.kurtosis_ok = std::abs(row.excess_kurtosis) <= th.max_abs_excess_kurtosis;
    }
    rep.variance_ok = rep.variance_ok && row.variance_ok;
    rep.gaussian = rep.gaussian && row.skewness_ok && row.kurtosis_ok;
    rep.rows.push_back(row);
  }

  const double r = static_cast<double>(cfg.replicas);
  for (std::size_t i = 0; i < cfg.horizon; ++i) {
    for (std::size_t j = i + 1; j < cfg.horizon; ++j) {
      const double rho = ens.increments.correlation(i, j);
      const double se = std::sqrt((1.0 - rho * rho) / (r - 2.0));
      const double z = std::abs(rho) / se;
      ++rep.correlation_pairs;
      rep.max_abs_correlation_z = std::max(rep.max_abs_correlation_z, z);
      if (!(z <= th.correlation_se_multiple)) ++rep.correlation_exceedances;
    }
  }
  rep.increments_ok = rep.correlation_exceedances == 0;
  return rep;
}

struct LlnReport {
  std::uint64_t t = 0;
  double z_bar = 0;
  double mean_square = 0;         // (1/N) sum_i Z_t(i)^2
  double z_bar_deviation = 0;     // |Z_t - a/m|
  double mean_square_deviation = 0; // |(1/N) sum Z_t(i)^2 - (x^inf_t + a^2/m^2)|
};

/// Single-replica comparison of Z_t and (1/N) sum Z_t(i)^2 with their
/// N -> infinity limits a/m and x^inf_t + a^2/m^2.
[[nodiscard]] inline LlnReport lln_check(const ModelParams& p, std::uint64_t t, const UniformSource& source,
                                         std::uint64_t replica = 0) {
  SystemState s = init_system(p);
  std::vector<double> u(p.n_urns());
  while (s.t < t) {
    draw_step_uniforms(source, replica, s.t, u);
    advance(s, p, u);
  }
  // exact integer sum of squares, one rounding at the end
  unsigned __int128 sq = 0;
  for (auto c : s.red_counts) sq += static_cast<unsigned __int128>(c) * static_cast<unsigned __int128>(c);
  const auto balls = static_cast<unsigned __int128>(s.balls(p));
  const double a_m = p.mean_fraction();
  const double a_m_sq = static_cast<double>(p.red_init() * p.red_init()) /
                        static_cast<double>(p.total_init() * p.total_init());
  LlnReport rep;
  rep.t = t;
  rep.z_bar = s.mean_fraction(p);
  rep.mean_square = static_cast<double>(sq) / static_cast<double>(balls * balls * p.n_urns());
  rep.z_bar_deviation = std::abs(rep.z_bar - a_m);
  rep.mean_square_deviation = std::abs(rep.mean_square - (limit_moments(p, t)[t] + a_m_sq));
  return rep;
}

} // namespace urnsync
