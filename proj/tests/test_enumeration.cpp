#include <stdexcept>

#include <gtest/gtest.h>

#include "oracles/brute_force_enumeration.hpp"
#include "urnsync/enumeration.hpp"
#include "urnsync/moments.hpp"

using namespace urnsync;

TEST(Enumeration, FirstStepIsOneSeventySecond) {
  for (double alpha : {0.0, 0.3, 1.0}) {
    const auto e = exact_enumeration_moments(ModelParams(2, 1, 1, alpha), 1);
    EXPECT_EQ(e.x, rational(1, 72));
    EXPECT_EQ(e.v, rational(1, 72));
    EXPECT_EQ(e.mean, rational(1, 2));
  }
}

TEST(Enumeration, TimeZero) {
  const auto e = exact_enumeration_moments(ModelParams(4, 2, 3, 0.5), 0);
  EXPECT_EQ(e.mean, rational(2, 5));
  EXPECT_EQ(e.v, 0);
  EXPECT_EQ(e.x, 0);
}

TEST(Enumeration, MatchesLiteralHistorySum) {
  for (std::size_t n = 1; n <= 6; ++n)
    for (std::uint64_t t = 1; n * t <= 12; ++t)
      for (std::int64_t a : {1, 2})
        for (std::int64_t b : {1, 2})
          for (double alpha : {0.0, 0.3, 0.5, 1.0}) {
            const ModelParams p(n, a, b, alpha);
            const auto lumped = exact_enumeration_moments(p, t);
            const auto brute = oracle::brute_force_moments(n, a, b, alpha, t);
            ASSERT_EQ(lumped.mean, brute.mean);
            ASSERT_EQ(lumped.v, brute.v) << n << " " << t << " " << alpha;
            ASSERT_EQ(lumped.x, brute.x) << n << " " << t << " " << alpha;
          }
}

TEST(Enumeration, MatchesRationalRecursion) {
  for (std::size_t n : {1, 3, 4, 8})
    for (double alpha : {0.0, 0.3, 0.8, 1.0}) {
      const ModelParams p(n, 2, 1, alpha);
      MomentState<rational> s;
      for (std::uint64_t t = 0; n * t <= max_enumeration_size; ++t) {
        const auto e = exact_enumeration_moments(p, t);
        ASSERT_EQ(e.v, s.v);
        ASSERT_EQ(e.x, s.x);
        ASSERT_EQ(e.mean_sq, s.v + e.mean * e.mean);
        s = finite_n_moment_step(p, s);
      }
    }
}

TEST(Enumeration, RejectsLargeInstances) {
  EXPECT_THROW((void)exact_enumeration_moments(ModelParams(5, 1, 1, 0.5), 5), std::length_error);
  EXPECT_NO_THROW((void)exact_enumeration_moments(ModelParams(24, 1, 1, 0.5), 1));
}
