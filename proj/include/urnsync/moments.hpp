#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "urnsync/model.hpp"

// Exact second-moment dynamics of the urn system.
//
//   v_t = Var(Z_t)                    (mean fraction across urns)
//   x_t = E[(Z_t(i) - Z_t)^2]         (dispersion around the mean)
//
// The two recursions are coupled through E[Z_t^2] = v_t + a^2/m^2 and
// (1/N) sum_i E[Z_t(i)^2] = x_t + v_t + a^2/m^2. Every function is
// templated on the scalar so the same code runs in double and in exact
// rational arithmetic.

namespace urnsync {

template <class Real>
struct MomentState {
  std::uint64_t t = 0;
  Real v{0};
  Real x{0};
};

template <class Real>
struct LimitMomentState {
  std::uint64_t t = 0;
  Real x_inf{0};
};

/// Per-model constants lifted into the scalar type. For rationals the double
/// alpha converts exactly (every double is a dyadic rational).
template <class Real>
struct ModelConstants {
  Real n;
  Real m;
  Real alpha;
  Real a_over_m;     // a/m
  Real a_over_m_sq;  // a^2/m^2
  Real n_ratio;      // (N-1)/N

  explicit ModelConstants(const ModelParams& p)
      : n(static_cast<long long>(p.n_urns())), m(static_cast<long long>(p.total_init())),
        alpha(p.alpha()), a_over_m(Real(static_cast<long long>(p.red_init())) / m),
        a_over_m_sq(a_over_m * a_over_m), n_ratio((n - Real(1)) / n) {}

  [[nodiscard]] Real denom(std::uint64_t t) const {
    return Real(static_cast<long long>(t)) + m + Real(1); // t + m + 1
  }
};

/// (1/N) sum_i E[Z_t(i)^2] = x + v + a^2/m^2.
template <class Real>
[[nodiscard]] Real mean_square_fraction(const ModelParams& p, const MomentState<Real>& s) {
  const ModelConstants<Real> c(p);
  return Real(s.x + s.v + c.a_over_m_sq);
}

template <class Real>
struct MomentIncrement {
  Real dv;
  Real dx;
};

template <class Real>
[[nodiscard]] MomentIncrement<Real> moment_increment(const ModelConstants<Real>& c,
                                                     const MomentState<Real>& s) {
  const Real s1 = c.denom(s.t);
  const Real s1_sq = s1 * s1;
  const Real one_minus_alpha = Real(1) - c.alpha;
  const Real ez2 = s.v + c.a_over_m_sq;
  const Real m2 = s.x + ez2;

  // Var(Z_{t+1}) - Var(Z_t)
  Real dv = c.a_over_m - c.alpha * (Real(2) - c.alpha) * ez2 - one_minus_alpha * one_minus_alpha * m2;
  dv /= s1_sq * c.n;

  // x_{t+1} - x_t
  const Real b = c.alpha * c.alpha - c.n_ratio * one_minus_alpha * one_minus_alpha;
  Real dx = -Real(2) * c.alpha * s.x / s1 + b * s.x / s1_sq + c.n_ratio * (c.a_over_m - ez2) / s1_sq;
  return {dv, dx};
}

/// One exact step of the coupled finite-N recursion for (v_t, x_t).
template <class Real>
[[nodiscard]] MomentState<Real> finite_n_moment_step(const ModelParams& p, const MomentState<Real>& s) {
  const ModelConstants<Real> c(p);
  const auto inc = moment_increment(c, s);
  return {s.t + 1, Real(s.v + inc.dv), Real(s.x + inc.dx)};
}

template <class Real>
[[nodiscard]] Real limit_moment_increment(const ModelConstants<Real>& c, const LimitMomentState<Real>& s) {
  const Real s1 = c.denom(s.t);
  const Real s1_sq = s1 * s1;
  return Real(-Real(2) * c.alpha * s.x_inf / s1 + (Real(2) * c.alpha - Real(1)) * s.x_inf / s1_sq +
              (c.a_over_m - c.a_over_m_sq) / s1_sq);
}

/// One step of the N -> infinity limit of the x recursion.
template <class Real>
[[nodiscard]] LimitMomentState<Real> limit_moment_step(const ModelParams& p, const LimitMomentState<Real>& s) {
  const ModelConstants<Real> c(p);
  return {s.t + 1, Real(s.x_inf + limit_moment_increment(c, s))};
}

/// Coefficients of x_{t+1} = f(t) x_t + g(t).
template <class Real>
struct RecursionCoefficients {
  Real a_coef; // 2 alpha
  Real b_coef; // alpha^2 - ((N-1)/N)(1-alpha)^2
  Real f;
  Real g;
};

template <class Real>
[[nodiscard]] RecursionCoefficients<Real> recursion_coefficients(const ModelParams& p, std::uint64_t t,
                                                                 const Real& ez2) {
  const ModelConstants<Real> c(p);
  if (ez2 < Real(0) || ez2 > c.a_over_m)
    throw std::domain_error("E[Z_t^2] must lie in [0, a/m]");
  const Real s1 = c.denom(t);
  const Real one_minus_alpha = Real(1) - c.alpha;
  RecursionCoefficients<Real> rc;
  rc.a_coef = Real(2) * c.alpha;
  rc.b_coef = c.alpha * c.alpha - c.n_ratio * one_minus_alpha * one_minus_alpha;
  rc.f = Real(1) - rc.a_coef / s1 + rc.b_coef / (s1 * s1);
  rc.g = c.n_ratio * (c.a_over_m - ez2) / (s1 * s1);
  return rc;
}

namespace detail {

// Neumaier-compensated running value for long floating-point recursions.
struct CompensatedValue {
  double sum = 0.0;
  double comp = 0.0;

  void add(double delta) noexcept {
    const double next = sum + delta;
    if (std::abs(sum) >= std::abs(delta))
      comp += (sum - next) + delta;
    else
      comp += (delta - next) + sum;
    sum = next;
  }
  [[nodiscard]] double value() const noexcept { return sum + comp; }
};

} // namespace detail

/// v_t and x_t for t = 0..horizon.
struct MomentSeries {
  std::vector<double> v;
  std::vector<double> x;
};

/// Iterate the finite-N recursion in double with compensated accumulation.
[[nodiscard]] inline MomentSeries finite_n_moments(const ModelParams& p, std::uint64_t horizon) {
  const ModelConstants<double> c(p);
  MomentSeries out;
  out.v.reserve(horizon + 1);
  out.x.reserve(horizon + 1);
  detail::CompensatedValue v, x;
  MomentState<double> s;
  out.v.push_back(0.0);
  out.x.push_back(0.0);
  for (std::uint64_t t = 0; t < horizon; ++t) {
    s = {t, v.value(), x.value()};
    const auto inc = moment_increment(c, s);
    v.add(inc.dv);
    x.add(inc.dx);
    out.v.push_back(v.value());
    out.x.push_back(x.value());
  }
  return out;
}

/// x^inf_t for t = 0..horizon (independent of N).
[[nodiscard]] inline std::vector<double> limit_moments(const ModelParams& p, std::uint64_t horizon) {
  const ModelConstants<double> c(p);
  std::vector<double> out;
  out.reserve(horizon + 1);
  detail::CompensatedValue x;
  out.push_back(0.0);
  for (std::uint64_t t = 0; t < horizon; ++t) {
    x.add(limit_moment_increment(c, LimitMomentState<double>{t, x.value()}));
    out.push_back(x.value());
  }
  return out;
}

/// x_t through the product form x_t = [prod_{k<t} f(k)] * sum_{i<t} F(i),
/// F(i) = g(i) / prod_{k<=i} f(k). `v_sequence[t]` supplies Var(Z_t) for
/// t < horizon. Returns x_0..x_horizon.
[[nodiscard]] inline std::vector<double> closed_form_x(const ModelParams& p, std::uint64_t horizon,
                                                       const std::vector<double>& v_sequence) {
  if (horizon > v_sequence.size())
    throw std::invalid_argument("horizon " + std::to_string(horizon) + " exceeds v_sequence length " +
                                std::to_string(v_sequence.size()));
  const double a_over_m_sq = p.mean_fraction() * p.mean_fraction();
  std::vector<double> x;
  x.reserve(horizon + 1);
  x.push_back(0.0); // xi_0 = x_0 = 0
  double prod = 1.0; // prod_{k<t} f(k)
  detail::CompensatedValue xi;
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const auto rc = recursion_coefficients<double>(p, t, v_sequence[t] + a_over_m_sq);
    prod *= rc.f;
    xi.add(rc.g / prod);
    x.push_back(prod * xi.value());
  }
  return x;
}

} // namespace urnsync
