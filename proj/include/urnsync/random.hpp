#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include <boost/math/distributions/normal.hpp>

namespace urnsync {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
// as easy as 1, 2, 3"). Pure function of (counter, key).
using philox_counter = std::array<std::uint32_t, 4>;
using philox_key = std::array<std::uint32_t, 2>;

constexpr philox_counter philox4x32(philox_counter ctr, philox_key key) noexcept {
  constexpr std::uint32_t m0 = 0xD2511F53u;
  constexpr std::uint32_t m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u;
  constexpr std::uint32_t w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += w0;
      key[1] += w1;
    }
    const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

// Independent families of draws addressed by the same (replica, t, i).
enum class Stream : std::uint32_t {
  urn_draws = 0,     // U(t, i) driving the reinforcement indicators
  limit_normals = 1, // B_t of the limiting Gauss-Markov recursion
};

/// Counter-based uniform source: a pure map (seed, replica, t, i) -> [0,1).
///
/// Nothing is stateful, so any replica or time slice can be regenerated in
/// isolation and replicas can run on any thread in any order.
class UniformSource {
public:
  constexpr explicit UniformSource(std::uint64_t seed) noexcept : seed_{seed} {}

  [[nodiscard]] constexpr std::uint64_t seed() const noexcept { return seed_; }

  [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t replica, std::uint64_t t,
                                             std::uint64_t i,
                                             Stream stream = Stream::urn_draws) const noexcept {
    // replica occupies 32 bits of the counter and its upper half is folded
    // into the stream word, so replica indices up to 2^48 stay distinct.
    const philox_counter ctr{
        static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(t),
        static_cast<std::uint32_t>(replica),
        static_cast<std::uint32_t>(stream) ^ (static_cast<std::uint32_t>(replica >> 32) << 16)};
    const philox_key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    const auto out = philox4x32(ctr, key);
    return (std::uint64_t{out[0]} << 32) | out[1];
  }

  /// Uniform on the 2^53-point grid {k / 2^53} in [0, 1).
  [[nodiscard]] constexpr double uniform(std::uint64_t replica, std::uint64_t t, std::uint64_t i,
                                         Stream stream = Stream::urn_draws) const noexcept {
    return static_cast<double>(bits(replica, t, i, stream) >> 11) * 0x1.0p-53;
  }

  /// Uniform on the midpoint grid {(k + 1/2) / 2^53}, strictly inside (0, 1).
  [[nodiscard]] constexpr double open_uniform(std::uint64_t replica, std::uint64_t t,
                                              std::uint64_t i,
                                              Stream stream = Stream::urn_draws) const noexcept {
    return (static_cast<double>(bits(replica, t, i, stream) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal by inverse-CDF transform of open_uniform.
  [[nodiscard]] double normal(std::uint64_t replica, std::uint64_t t, std::uint64_t i,
                              Stream stream = Stream::limit_normals) const {
    return boost::math::quantile(boost::math::normal_distribution<double>{},
                                 open_uniform(replica, t, i, stream));
  }

private:
  std::uint64_t seed_;
};

} // namespace urnsync
