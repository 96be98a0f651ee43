#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "urnsync/model.hpp"

namespace urnsync {

using rational = boost::multiprecision::cpp_rational;

/// Exact moments of the urn system at a fixed time.
struct ExactMoments {
  std::uint64_t t = 0;
  rational mean;    // E[Z_t]
  rational mean_sq; // E[Z_t^2]
  rational v;       // Var(Z_t)
  rational x;       // E[(Z_t(i) - Z_t)^2]
};

namespace detail {

inline rational binomial(std::uint64_t n, std::uint64_t k) {
  boost::multiprecision::cpp_int r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return rational(r);
}

inline rational power(const rational& base, std::uint64_t e) {
  rational r(1);
  for (std::uint64_t k = 0; k < e; ++k) r *= base;
  return r;
}

} // namespace detail

/// Largest N * t accepted by exact_enumeration_moments.
inline constexpr std::uint64_t max_enumeration_size = 24;

/// Exact law of the system at time t by enumerating every draw outcome with
/// rational probabilities.
///
/// The transition kernel commutes with urn permutations, so the sorted count
/// vector is itself a Markov chain; outcomes are enumerated per group of urns
/// sharing a count (binomially weighted) and identical sorted states merged.
/// This is the full 2^(N t) sum with exchangeable branches collapsed.
[[nodiscard]] inline ExactMoments exact_enumeration_moments(const ModelParams& p, std::uint64_t t) {
  const std::uint64_t n = p.n_urns();
  if (n * t > max_enumeration_size)
    throw std::length_error("instance too large for exact enumeration: N*t = " + std::to_string(n * t) +
                            " > " + std::to_string(max_enumeration_size));

  using counts = std::vector<std::int64_t>;
  const rational alpha(p.alpha());
  const rational one(1);
  const std::int64_t m = p.total_init();

  std::map<counts, rational> law;
  law.emplace(counts(n, p.red_init()), one);

  for (std::uint64_t step = 0; step < t; ++step) {
    const rational balls(static_cast<long long>(static_cast<std::int64_t>(step) + m));
    std::map<counts, rational> next;
    for (const auto& [state, prob] : law) {
      // state is sorted: split into runs of equal counts
      std::vector<std::pair<std::int64_t, std::uint64_t>> groups;
      std::int64_t total = 0;
      for (auto c : state) {
        total += c;
        if (groups.empty() || groups.back().first != c)
          groups.emplace_back(c, 1);
        else
          ++groups.back().second;
      }
      const rational z_bar = rational(static_cast<long long>(total)) / (balls * static_cast<long long>(n));
      std::vector<rational> red_prob;
      red_prob.reserve(groups.size());
      for (const auto& [c, mult] : groups)
        red_prob.push_back(alpha * z_bar + (one - alpha) * rational(static_cast<long long>(c)) / balls);

      // odometer over j_g in [0, mult_g]: j_g urns of group g draw red
      std::vector<std::uint64_t> reds(groups.size(), 0);
      while (true) {
        rational w = prob;
        counts out;
        out.reserve(n);
        for (std::size_t g = 0; g < groups.size(); ++g) {
          const auto [c, mult] = groups[g];
          const auto j = reds[g];
          w *= detail::binomial(mult, j);
          w *= detail::power(red_prob[g], j);
          w *= detail::power(one - red_prob[g], mult - j);
          out.insert(out.end(), mult - j, c);
          out.insert(out.end(), j, c + 1);
        }
        std::sort(out.begin(), out.end());
        if (w != 0) next[out] += w;

        std::size_t g = 0;
        while (g < groups.size() && reds[g] == groups[g].second) reds[g++] = 0;
        if (g == groups.size()) break;
        ++reds[g];
      }
    }
    law = std::move(next);
  }

  const rational balls(static_cast<long long>(static_cast<std::int64_t>(t) + m));
  const rational nn(static_cast<long long>(n));
  ExactMoments out;
  out.t = t;
  for (const auto& [state, prob] : law) {
    std::int64_t total = 0;
    for (auto c : state) total += c;
    const rational z_bar = rational(static_cast<long long>(total)) / (balls * nn);
    rational dispersion(0);
    for (auto c : state) {
      const rational d = rational(static_cast<long long>(c)) / balls - z_bar;
      dispersion += d * d;
    }
    out.mean += prob * z_bar;
    out.mean_sq += prob * z_bar * z_bar;
    out.x += prob * dispersion / nn;
  }
  out.v = out.mean_sq - out.mean * out.mean;
  return out;
}

} // namespace urnsync
