#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "urnsync/asymptotics.hpp"
#include "urnsync/clt.hpp"
#include "urnsync/enumeration.hpp"
#include "urnsync/model.hpp"
#include "urnsync/moments.hpp"
#include "urnsync/montecarlo.hpp"
#include "urnsync/random.hpp"
#include "urnsync/stats.hpp"
#include "urnsync/trajectory.hpp"

// Acceptance checks shared by the `verify` command and the acceptance test
// binary. Each check is a fixed experiment with a fixed seed.

namespace urnsync {

inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

inline constexpr std::uint64_t acceptance_seed = 20261016;

struct AcceptanceOptions {
  bool quick = true; // false adds the extended sweeps
  unsigned threads = 1;
};

struct CriterionResult {
  std::string id;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

namespace acceptance {

inline std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

inline double to_double(const rational& r) { return static_cast<double>(r); }

inline CriterionResult oracle_equivalence() {
  CriterionResult r{"1", "exact enumeration equals the moment recursion", true, ""};
  std::size_t cases = 0, rational_mismatch = 0, float_mismatch = 0;
  double worst_rel = 0;
  auto rel = [](double f, double e) { return e == 0.0 ? std::abs(f) : std::abs(f - e) / std::abs(e); };
  for (std::uint64_t n = 1; n <= max_enumeration_size; ++n) {
    for (std::int64_t a : {1, 2})
      for (std::int64_t b : {1, 2})
        for (double alpha : {0.0, 0.3, 0.5, 0.8, 1.0}) {
          const ModelParams p(n, a, b, alpha);
          const std::uint64_t t_max = max_enumeration_size / n;
          const auto series = finite_n_moments(p, t_max);
          MomentState<rational> s;
          for (std::uint64_t t = 0; t <= t_max; ++t) {
            const auto e = exact_enumeration_moments(p, t);
            ++cases;
            if (e.v != s.v || e.x != s.x || e.mean != rational(a, a + b)) ++rational_mismatch;
            const double ev = to_double(e.v), ex = to_double(e.x);
            const double err = std::max(rel(series.v[t], ev), rel(series.x[t], ex));
            worst_rel = std::max(worst_rel, err);
            const bool zero_ok = (ev != 0.0 || series.v[t] == 0.0) && (ex != 0.0 || series.x[t] == 0.0);
            if (err > 1e-12 || !zero_ok) ++float_mismatch;
            s = finite_n_moment_step(p, s);
          }
        }
  }
  r.passed = rational_mismatch == 0 && float_mismatch == 0;
  r.detail = std::to_string(cases) + " (N,t,a,b,alpha) cases; rational mismatches " +
             std::to_string(rational_mismatch) + ", float mismatches " + std::to_string(float_mismatch) +
             ", worst float rel err " + fmt(worst_rel, 3);
  return r;
}

inline CriterionResult anchors() {
  CriterionResult r{"2", "hand-derived first-step anchors", true, ""};
  double worst = 0;
  for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const auto s = finite_n_moments(ModelParams(2, 1, 1, alpha), 1);
    worst = std::max({worst, std::abs(s.x[1] - 1.0 / 72), std::abs(s.v[1] - 1.0 / 72)});
    const auto single = finite_n_moments(ModelParams(1, 1, 1, alpha), 1);
    worst = std::max(worst, std::abs(single.v[1] - 1.0 / 36));
    const ModelParams p(3, 1, 1, alpha);
    worst = std::max(worst, std::abs(limit_moments(p, 1)[1] - 1.0 / 36));
    worst = std::max(worst, std::abs(sigma_schedule(p, 1).sigma_sq[0] - 1.0 / 36));
  }
  r.passed = worst <= 1e-15;
  r.detail = "max |value - anchor| = " + fmt(worst, 3);
  return r;
}

inline CriterionResult regimes() {
  CriterionResult r{"3", "power-law regimes of the limit dispersion", true, ""};
  const std::uint64_t t_lo = 1000, t_hi = 1000000;
  std::ostringstream d;
  for (double alpha : {0.1, 0.2, 0.3, 0.4, 0.6, 0.8, 1.0}) {
    const auto x = limit_moments(ModelParams(1, 1, 1, alpha), t_hi);
    const auto fit = fit_power_law(log_subsample(x, t_lo, t_hi), {double(t_lo), double(t_hi)});
    const double target = alpha < 0.5 ? -2.0 * alpha : -1.0;
    const bool ok = std::abs(fit.slope - target) <= 0.05;
    r.passed = r.passed && ok;
    d << "a=" << alpha << ":" << fmt(fit.slope) << (ok ? "" : "(!)") << " ";
  }
  const auto x = limit_moments(ModelParams(1, 1, 1, 0.5), t_hi);
  const auto diag = critical_diagnostic(log_subsample(x, t_lo, t_hi));
  r.passed = r.passed && diag.bounded;
  d << "a=0.5 ratio change " << fmt(100 * diag.last_change, 3) << "%";
  r.detail = d.str();
  return r;
}

inline CriterionResult variance_bound(const std::vector<std::uint64_t>& ns, const std::vector<std::int64_t>& abs,
                                      const std::vector<double>& alphas, std::uint64_t horizon, std::string id) {
  CriterionResult r{std::move(id), "variance bound v_t < (a/m^2)/N and E[Z^2] < a/m", true, ""};
  std::size_t runs = 0, violations = 0;
  double worst_ratio = 0;
  for (auto n : ns)
    for (auto a : abs)
      for (auto b : abs)
        for (double alpha : alphas) {
          const ModelParams p(n, a, b, alpha);
          const double m = static_cast<double>(a + b);
          const double bound = static_cast<double>(a) / (m * m) / static_cast<double>(n);
          const double a_m = p.mean_fraction();
          const auto s = finite_n_moments(p, horizon);
          ++runs;
          for (std::uint64_t t = 0; t <= horizon; ++t) {
            worst_ratio = std::max(worst_ratio, s.v[t] / bound);
            if (!(s.v[t] < bound) || !(s.v[t] + a_m * a_m < a_m)) {
              ++violations;
              break;
            }
          }
        }
  r.passed = violations == 0;
  r.detail = std::to_string(runs) + " parameter sets to t=" + std::to_string(horizon) + ", violations " +
             std::to_string(violations) + ", max v_t/bound " + fmt(worst_ratio);
  return r;
}

inline CriterionResult monte_carlo(const std::vector<double>& alphas, std::uint64_t n, std::string id,
                                   unsigned threads) {
  CriterionResult r{std::move(id), "Monte Carlo estimates match the recursion", true, ""};
  std::vector<std::uint64_t> times;
  for (std::uint64_t t = 5; t <= 100; t += 5) times.push_back(t);
  std::ostringstream d;
  for (double alpha : alphas) {
    const ModelParams p(n, 1, 1, alpha);
    EnsembleSpec spec{p, 10000, 100, acceptance_seed, times, estimator::x_hat | estimator::v_hat, threads};
    const auto est = run_replicas(spec);
    const auto exact = finite_n_moments(p, 100);
    std::size_t x_in = 0, v_in = 0;
    for (auto t : times) {
      const auto& xh = est.get(t, "x_hat");
      const auto& vh = est.get(t, "v_hat");
      if (std::abs(xh.value - exact.x[t]) <= 4 * xh.std_error) ++x_in;
      if (std::abs(vh.value - exact.v[t]) <= 4 * vh.std_error) ++v_in;
    }
    const bool ok = x_in * 100 >= 95 * times.size() && v_in * 100 >= 95 * times.size();
    r.passed = r.passed && ok;
    d << "a=" << alpha << ": x " << x_in << "/20, v " << v_in << "/20; ";
  }
  r.detail = d.str();
  return r;
}

inline CriterionResult gaussian_limit(unsigned threads) {
  CriterionResult r{"6", "Gaussian limit of sqrt(N)(Z_t - a/m)", true, ""};
  const ModelParams p(2000, 1, 1, 0.5);
  CltConfig cfg{p, 2000, 20, acceptance_seed, threads, {}};
  const auto rep = clt_moment_test(cfg);
  double max_vz = 0, max_skew = 0, max_kurt = 0;
  for (const auto& row : rep.rows) {
    max_vz = std::max(max_vz, std::abs(row.variance_z));
    max_skew = std::max(max_skew, std::abs(row.skewness));
    max_kurt = std::max(max_kurt, std::abs(row.excess_kurtosis));
  }
  const auto sched = sigma_schedule(p, 20);
  const auto cum = sched.cumulative();
  const auto ens = sample_limit_ensemble(sched, acceptance_seed, 10000, threads);
  double max_limit_z = 0;
  bool limit_ok = true;
  for (std::uint64_t t = 1; t <= 20; ++t) {
    const auto& st = ens.marginals[t];
    const double z = std::abs(st.variance() - cum[t]) / st.variance_stderr();
    max_limit_z = std::max(max_limit_z, z);
    limit_ok = limit_ok && z <= 4.0;
  }
  r.passed = rep.passed() && limit_ok;
  r.detail = "max |var z| " + fmt(max_vz, 3) + ", max |skew| " + fmt(max_skew, 3) + ", max |ex.kurt| " +
             fmt(max_kurt, 3) + ", corr exceedances " + std::to_string(rep.correlation_exceedances) + "/" +
             std::to_string(rep.correlation_pairs) + ", limit sampler max |var z| " + fmt(max_limit_z, 3);
  return r;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

inline CriterionResult law_of_large_numbers() {
  CriterionResult r{"7", "law of large numbers for Z_t and mean Z_t(i)^2", true, ""};
  const ModelParams big(100000, 1, 1, 0.5), small(10000, 1, 1, 0.5);
  const auto one = lln_check(big, 5, UniformSource(acceptance_seed));
  const bool single_ok = one.z_bar_deviation <= 1e-2 && one.mean_square_deviation <= 1e-2;
  std::vector<double> zb_small, zb_big, ms_small, ms_big;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const UniformSource src(acceptance_seed + k);
    const auto s = lln_check(small, 5, src), b = lln_check(big, 5, src);
    zb_small.push_back(s.z_bar_deviation);
    zb_big.push_back(b.z_bar_deviation);
    ms_small.push_back(s.mean_square_deviation);
    ms_big.push_back(b.mean_square_deviation);
  }
  const double f_zb = median(zb_small) / median(zb_big);
  const double f_ms = median(ms_small) / median(ms_big);
  auto in = [](double f) { return f >= 2.2 && f <= 4.5; };
  r.passed = single_ok && in(f_zb) && in(f_ms);
  r.detail = "N=1e5: |Z-a/m| " + fmt(one.z_bar_deviation, 3) + ", |mean sq dev| " +
             fmt(one.mean_square_deviation, 3) + "; shrink factor 1e4->1e5: Z " + fmt(f_zb, 3) + ", sq " +
             fmt(f_ms, 3);
  return r;
}

inline CriterionResult uniform_limit(unsigned threads) {
  CriterionResult r{"8", "alpha=0 single urn converges to Uniform[0,1]", true, ""};
  const ModelParams p(1, 1, 1, 0.0);
  const std::uint64_t horizon = 5000, replicas = 5000;
  const UniformSource src(acceptance_seed);
  const RecordPolicy policy{RecordSchedule{{horizon}}, false};
  auto z = tree_reduce<std::vector<double>>(
      replicas, threads,
      [&](std::size_t b, std::size_t e) {
        std::vector<double> out;
        for (std::size_t k = b; k < e; ++k) out.push_back(run_trajectory(p, horizon, src, k, policy).points.back().z_bar);
        return out;
      },
      [](std::vector<double> a, const std::vector<double>& b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
      });
  const double ks = ks_distance_uniform(std::move(z));
  r.passed = ks <= 0.03;
  r.detail = "KS distance " + fmt(ks, 4);
  return r;
}

inline CriterionResult synchronization() {
  CriterionResult r{"9", "synchronization of N=5 urns at alpha=0.5", true, ""};
  const ModelParams p(5, 1, 1, 0.5);
  const std::uint64_t horizon = 100000;
  const RecordPolicy policy{RecordSchedule{{horizon}}, false};
  std::size_t spread_out = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const auto rec = run_trajectory(p, horizon, UniformSource(acceptance_seed + k), 0, policy);
    if (rec.points.back().spread > 0.1) ++spread_out;
  }
  const auto x = finite_n_moments(p, horizon).x;
  const auto q = quasi_martingale_sum(p, horizon, x);
  const bool spread_ok = spread_out <= 5;
  const bool plateau_ok = q.tail_fraction <= 0.01;
  const auto q6 = quasi_martingale_sum(p, 10 * horizon, finite_n_moments(p, 10 * horizon).x);
  r.passed = spread_ok && plateau_ok;
  r.detail = "seeds with spread > 0.1: " + std::to_string(spread_out) + "/100; drift-sum last-decade share " +
             fmt(100 * q.tail_fraction, 3) + "% at T=1e5 (" + fmt(100 * q6.tail_fraction, 3) + "% at T=1e6)";
  return r;
}

inline std::string slurp(const std::filesystem::path& f) {
  std::ifstream in(f, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline CriterionResult reproducibility() {
  CriterionResult r{"10", "bit-identical re-runs across thread counts", true, ""};
  std::string tmpl = (std::filesystem::temp_directory_path() / "urnsync-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) {
    r.passed = false;
    r.detail = "cannot create a temporary directory";
    return r;
  }
  const std::filesystem::path dir = tmpl;
  const std::string seed = std::to_string(acceptance_seed);
  const std::vector<std::vector<std::string>> commands{
      {"simulate", "--n", "5", "--alpha", "0.5", "--horizon", "200", "--record-every", "10", "--seed", seed},
      {"simulate", "--n", "4", "--alpha", "0.3", "--horizon", "50", "--full", "--seed", seed},
      {"simulate", "--n", "5", "--alpha", "0.25", "--horizon", "100", "--replicas", "3000", "--record-every",
       "10", "--seed", seed},
      {"simulate", "--n", "3", "--alpha", "0.75", "--horizon", "60", "--replicas", "700", "--format", "jsonl",
       "--log-per-decade", "5", "--seed", seed},
      {"moments", "--n", "2", "--alpha", "0.5", "--horizon", "500"},
      {"asymptotics", "--alphas", "0.2,0.5,0.8"},
      {"clt", "--n", "500", "--replicas", "500", "--horizon", "10", "--seed", seed},
  };
  std::size_t compared = 0, differing = 0, errors = 0;
  std::ostringstream sink, err;
  auto run = [&](std::vector<std::string> args, unsigned threads, const std::filesystem::path& out) {
    args.insert(args.end(), {"--threads", std::to_string(threads), "--out", out.string()});
    if (run_command(args, sink, err) != 0) ++errors;
  };
  auto same = [&](const std::filesystem::path& a, const std::filesystem::path& b) {
    ++compared;
    const auto x = slurp(a), y = slurp(b);
    if (x.empty() || x != y) ++differing;
  };
  for (std::size_t c = 0; c < commands.size(); ++c) {
    const bool full = std::find(commands[c].begin(), commands[c].end(), "--full") != commands[c].end();
    const auto base = dir / ("cmd" + std::to_string(c) + "_t1");
    for (unsigned threads : {1u, 2u, 8u}) {
      const auto direct = dir / ("cmd" + std::to_string(c) + "_t" + std::to_string(threads));
      const auto replay = dir / ("cmd" + std::to_string(c) + "_replay_t" + std::to_string(threads));
      run(commands[c], threads, direct);
      run({"--config", direct.string()}, threads, replay);
      if (threads != 1) same(base, direct);
      same(base, replay);
      if (full) {
        same(base.string() + ".full.csv", direct.string() + ".full.csv");
        same(base.string() + ".full.csv", replay.string() + ".full.csv");
      }
    }
  }
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  r.passed = errors == 0 && differing == 0;
  r.detail = std::to_string(commands.size()) + " commands x threads {1,2,8} + config replays: " +
             std::to_string(compared) + " comparisons, " + std::to_string(differing) + " differ, " +
             std::to_string(errors) + " command errors";
  if (errors) r.detail += " (" + err.str().substr(0, 200) + ")";
  return r;
}

inline CriterionResult sigma_positivity() {
  CriterionResult r{"X1", "sigma_t^2 >= 0 over alpha grid to t=1e6", true, ""};
  double min_val = 1;
  for (int k = 0; k <= 20; ++k) {
    try {
      const auto s = sigma_schedule(ModelParams(1, 1 + k % 3, 1 + k % 2, k / 20.0), 1000000);
      min_val = std::min(min_val, *std::min_element(s.sigma_sq.begin(), s.sigma_sq.end()));
    } catch (const std::logic_error&) {
      r.passed = false;
    }
  }
  r.detail = "min sigma_t^2 " + fmt(min_val, 3);
  return r;
}

} // namespace acceptance

template <class Fn>
CriterionResult timed(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  auto r = fn();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

[[nodiscard]] inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
  using namespace acceptance;
  const unsigned th = std::max(1u, opt.threads);
  std::vector<CriterionResult> out;
  out.push_back(timed(oracle_equivalence));
  out.push_back(timed(anchors));
  out.push_back(timed(regimes));
  out.push_back(timed([] {
    return variance_bound({1, 2, 5, 10, 100, 1000}, {1, 2, 3}, {0.0, 0.25, 0.5, 0.75, 1.0}, 100000, "4");
  }));
  out.push_back(timed([th] { return monte_carlo({0.25, 0.5, 0.75}, 5, "5", th); }));
  out.push_back(timed([th] { return gaussian_limit(th); }));
  out.push_back(timed(law_of_large_numbers));
  out.push_back(timed([th] { return uniform_limit(th); }));
  out.push_back(timed(synchronization));
  out.push_back(timed(reproducibility));
  if (!opt.quick) {
    out.push_back(timed(sigma_positivity));
    out.push_back(timed([] {
      return variance_bound({2, 10, 1000}, {1, 3}, {0.0, 0.5, 1.0}, 1000000, "X2");
    }));
    out.push_back(timed([th] { return monte_carlo({0.0, 1.0}, 2, "X3", th); }));
  }
  return out;
}

/// One line per check; returns true iff all passed.
inline bool print_acceptance(const std::vector<CriterionResult>& results, std::ostream& os) {
  std::size_t passed = 0;
  for (const auto& r : results) {
    os << (r.passed ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.title << ": " << r.detail << " ("
       << acceptance::fmt(r.seconds, 3) << " s)\n";
    if (r.passed) ++passed;
  }
  os << passed << "/" << results.size() << " checks passed\n";
  return passed == results.size();
}

} // namespace urnsync

#include "urnsync/cli.hpp"
