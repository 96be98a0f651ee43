#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "urnsync/clt.hpp"

using namespace urnsync;

TEST(SigmaSchedule, Anchors) {
  for (double alpha : {0.0, 0.5, 1.0})
    EXPECT_NEAR(sigma_schedule(ModelParams(5, 1, 1, alpha), 1).sigma_sq[0], 1.0 / 36, 1e-15);
  const auto s = sigma_schedule(ModelParams(5, 1, 1, 0.5), 3);
  EXPECT_NEAR(s.sigma_sq[1], 35.0 / 144 / 16, 1e-15);
  const auto c = s.cumulative();
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(c[0], 0.0);
  EXPECT_NEAR(c[3], s.sigma_sq[0] + s.sigma_sq[1] + s.sigma_sq[2], 1e-16);
  EXPECT_THROW((void)sigma_schedule(ModelParams(5, 1, 1, 0.5), 0), std::invalid_argument);
}

TEST(SigmaSchedule, NonNegativeOverLongHorizons) {
  for (double alpha : {0.0, 0.3, 0.5, 0.9, 1.0}) {
    const auto s = sigma_schedule(ModelParams(1, 2, 3, alpha), 200000);
    for (double v : s.sigma_sq) ASSERT_GE(v, 0.0);
  }
}

TEST(LimitProcess, DeterministicAndStartsAtZero) {
  const auto sched = sigma_schedule(ModelParams(1, 1, 1, 0.5), 10);
  const UniformSource src(3);
  const auto a = sample_limit_process(sched, src, 4), b = sample_limit_process(sched, src, 4);
  EXPECT_EQ(a.w, b.w);
  EXPECT_EQ(a.w.size(), 11u);
  EXPECT_EQ(a.w[0], 0.0);
  EXPECT_NEAR(a.w[1], std::sqrt(sched.sigma_sq[0]) * src.normal(4, 1, 0), 1e-15);
}

TEST(LimitProcess, VarianceMatchesSchedule) {
  const auto sched = sigma_schedule(ModelParams(1, 1, 2, 0.3), 15);
  const auto cum = sched.cumulative();
  const auto ens = sample_limit_ensemble(sched, 8, 20000, 2);
  for (std::uint64_t t = 1; t <= 15; ++t) {
    const auto& st = ens.marginals[t];
    EXPECT_LT(std::abs(st.variance() - cum[t]), 4 * st.variance_stderr()) << t;
    EXPECT_LT(std::abs(st.mean()), 4 * st.mean_stderr()) << t;
  }
  EXPECT_EQ(ens.increments.count(), 20000u);
  EXPECT_EQ(sample_limit_ensemble(sched, 8, 700, 1).marginals[15], sample_limit_ensemble(sched, 8, 700, 3).marginals[15]);
}

TEST(CltMomentTest, Preconditions) {
  CltConfig cfg{ModelParams(600, 1, 1, 0.5), 100, 5, 1, 1, {}};
  EXPECT_THROW((void)clt_moment_test(cfg), std::invalid_argument);
  cfg = {ModelParams(10, 1, 1, 0.5), 600, 5, 1, 1, {}};
  EXPECT_THROW((void)clt_moment_test(cfg), std::invalid_argument);
}

TEST(CltMomentTest, LargeSystemLooksGaussian) {
  CltConfig cfg{ModelParams(800, 1, 1, 0.6), 1500, 8, 5, 2, {}};
  const auto rep = clt_moment_test(cfg);
  ASSERT_EQ(rep.rows.size(), 9u);
  EXPECT_TRUE(rep.rows[0].degenerate);
  EXPECT_TRUE(rep.variance_ok);
  EXPECT_EQ(rep.correlation_pairs, 28u);
  for (const auto& r : rep.rows) EXPECT_NEAR(r.ref_finite, r.ref_limit, 0.01 * r.ref_limit + 1e-15);
}

// Two urns are far from Gaussian: the moment test must reject them.
TEST(CltMomentTest, SmallSystemNegativeControl) {
  CltThresholds th;
  th.min_urns = 1;
  CltConfig cfg{ModelParams(2, 1, 1, 0.5), 2000, 20, 6, 1, th};
  const auto rep = clt_moment_test(cfg);
  EXPECT_FALSE(rep.gaussian);
  EXPECT_FALSE(rep.passed());
  EXPECT_TRUE(rep.variance_ok); // variance still matches N v_t exactly in law
}

TEST(CltMomentTest, IndependentOfThreads) {
  CltConfig a{ModelParams(500, 1, 1, 0.5), 600, 4, 9, 1, {}}, b = a;
  b.threads = 4;
  const auto ra = clt_moment_test(a), rb = clt_moment_test(b);
  for (std::size_t k = 0; k < ra.rows.size(); ++k) {
    EXPECT_EQ(ra.rows[k].variance, rb.rows[k].variance);
    EXPECT_EQ(ra.rows[k].skewness, rb.rows[k].skewness);
  }
  EXPECT_EQ(ra.max_abs_correlation_z, rb.max_abs_correlation_z);
}

TEST(Lln, DeviationsShrinkWithN) {
  const UniformSource src(10);
  const auto small = lln_check(ModelParams(100, 1, 1, 0.5), 5, src);
  const auto big = lln_check(ModelParams(200000, 1, 1, 0.5), 5, src);
  EXPECT_EQ(big.t, 5u);
  EXPECT_LT(big.z_bar_deviation, 1e-2);
  EXPECT_LT(big.mean_square_deviation, 1e-2);
  EXPECT_LT(big.z_bar_deviation + big.mean_square_deviation, small.z_bar_deviation + small.mean_square_deviation);
}

TEST(EmpiricalW, ZeroAtStart) {
  const ModelParams p(9, 2, 1, 0.5);
  EXPECT_NEAR(empirical_w(p, init_system(p)), 0.0, 1e-15);
}
