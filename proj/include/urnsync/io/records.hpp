#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "urnsync/asymptotics.hpp"
#include "urnsync/clt.hpp"
#include "urnsync/io/table.hpp"
#include "urnsync/montecarlo.hpp"
#include "urnsync/trajectory.hpp"

// Conversions from module results to typed record tables.

namespace urnsync::io {

namespace detail {
inline std::int64_t as_int(std::uint64_t v) { return static_cast<std::int64_t>(v); }
} // namespace detail

[[nodiscard]] inline Table trajectory_table(const TrajectoryRecord& rec) {
  Table t = make_table("trajectory");
  for (const auto& p : rec.points)
    t.rows.push_back({detail::as_int(p.t), p.z_bar, p.z_min, p.z_max, p.spread});
  return t;
}

[[nodiscard]] inline Table trajectory_full_table(const TrajectoryRecord& rec) {
  Table t = make_table("trajectory_full");
  for (const auto& snap : rec.full)
    for (std::size_t i = 0; i < snap.z.size(); ++i)
      t.rows.push_back({detail::as_int(snap.t), detail::as_int(i), snap.z[i]});
  return t;
}

/// Rows at `times` (each <= horizon of the supplied series).
[[nodiscard]] inline Table moments_table(const MomentSeries& finite, const std::vector<double>& x_inf,
                                         const std::vector<std::uint64_t>& times) {
  Table t = make_table("moments");
  for (auto s : times) t.rows.push_back({detail::as_int(s), finite.v.at(s), finite.x.at(s), x_inf.at(s)});
  return t;
}

[[nodiscard]] inline Table ensemble_table(const EnsembleEstimates& est) {
  Table t = make_table("ensemble");
  for (const auto& r : est.rows)
    t.rows.push_back({detail::as_int(r.t), r.estimator, r.value, r.std_error, detail::as_int(r.n_samples)});
  return t;
}

struct AsymptoticsRecord {
  double alpha = 0;
  Regime regime;
  ExponentFit fit;
  std::string ratio_flag; // "bounded", "unbounded", or "n/a"
};

[[nodiscard]] inline Table asymptotics_table(const std::vector<AsymptoticsRecord>& recs) {
  Table t = make_table("asymptotics");
  for (const auto& r : recs)
    t.rows.push_back({r.alpha, std::string(to_string(r.regime.label)), r.fit.slope, r.fit.r_squared,
                      Interval{r.fit.window.first, r.fit.window.second}, r.ratio_flag});
  return t;
}

[[nodiscard]] inline Table clt_table(const CltReport& rep) {
  Table t = make_table("clt");
  for (const auto& r : rep.rows)
    t.rows.push_back({detail::as_int(r.t), r.mean, r.variance, r.variance_se, r.skewness, r.excess_kurtosis,
                      r.ref_finite, r.ref_limit, r.variance_z, r.variance_ok, r.skewness_ok, r.kurtosis_ok});
  return t;
}

[[nodiscard]] inline Table clt_summary_table(const CltReport& rep) {
  Table t = make_table("clt_summary");
  t.rows.push_back({detail::as_int(rep.replicas), detail::as_int(rep.correlation_pairs),
                    detail::as_int(rep.correlation_exceedances), rep.max_abs_correlation_z, rep.variance_ok,
                    rep.gaussian, rep.increments_ok, rep.passed()});
  return t;
}

} // namespace urnsync::io
