#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "urnsync/model.hpp"
#include "urnsync/random.hpp"
#include "urnsync/trajectory.hpp"

using namespace urnsync;

namespace {

template <class Fn>
std::string error_of(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

} // namespace

TEST(ModelParams, Validation) {
  EXPECT_EQ(error_of([] { ModelParams(0, 1, 1, 0.5); }), "n_urns must be >= 1");
  EXPECT_EQ(error_of([] { ModelParams(2, 0, 1, 0.5); }), "red_init must be >= 1");
  EXPECT_EQ(error_of([] { ModelParams(2, 1, 0, 0.5); }), "white_init must be >= 1");
  EXPECT_EQ(error_of([] { ModelParams(2, 1, 1, 1.5); }), "alpha must lie in [0,1]");
  EXPECT_EQ(error_of([] { ModelParams(2, 1, 1, -0.1); }), "alpha must lie in [0,1]");
  EXPECT_EQ(error_of([] { ModelParams(2, 1, 1, std::nan("")); }), "alpha must lie in [0,1]");
  EXPECT_NO_THROW(ModelParams(1, 1, 1, 0.0));
  EXPECT_NO_THROW(ModelParams(1, 1, 1, 1.0));
}

TEST(ModelParams, DerivedQuantities) {
  const ModelParams p(3, 2, 3, 0.4);
  EXPECT_EQ(p.total_init(), 5);
  EXPECT_DOUBLE_EQ(p.mean_fraction(), 0.4);
  EXPECT_DOUBLE_EQ(p.bernoulli_variance(), 0.4 - 0.16);
}

TEST(SystemState, InitialState) {
  const ModelParams p(4, 2, 3, 0.5);
  const auto s = init_system(p);
  EXPECT_EQ(s.t, 0u);
  EXPECT_EQ(s.red_counts, std::vector<std::int64_t>(4, 2));
  EXPECT_EQ(s.balls(p), 5);
  EXPECT_DOUBLE_EQ(s.mean_fraction(p), 0.4);
  for (double z : s.fractions(p)) EXPECT_DOUBLE_EQ(z, 0.4);
}

TEST(Reinforcement, HandComputedProbability) {
  const ModelParams p(2, 1, 1, 0.5);
  const SystemState s{1, {2, 1}}; // Z = (2/3, 1/3), mean 1/2
  EXPECT_NEAR(reinforcement_probability(s, p, 0), 0.25 + 0.5 * 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(reinforcement_probability(s, p, 1), 0.25 + 0.5 / 3.0, 1e-15);
  EXPECT_THROW((void)reinforcement_probability(s, p, 2), std::out_of_range);
}

TEST(Reinforcement, ExtremeCouplings) {
  const SystemState s{2, {3, 1, 2}};
  const ModelParams own(3, 1, 1, 0.0), shared(3, 1, 1, 1.0);
  EXPECT_DOUBLE_EQ(reinforcement_probability(s, own, 0), 0.75);
  EXPECT_DOUBLE_EQ(reinforcement_probability(s, own, 1), 0.25);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(reinforcement_probability(s, shared, i), 0.5);
}

TEST(Advance, ThresholdIsInclusive) {
  const ModelParams p(2, 1, 1, 0.3);
  const auto s = init_system(p); // probability exactly 1/2 for both urns
  const std::vector<double> tie{0.5, std::nextafter(0.5, 1.0)};
  const auto next = step(s, p, tie);
  EXPECT_EQ(next.red_counts, (std::vector<std::int64_t>{2, 1}));
  EXPECT_EQ(next.t, 1u);
}

TEST(Advance, AgreesWithReinforcementProbabilityBitwise) {
  const ModelParams p(5, 2, 3, 0.37);
  const UniformSource src(5);
  SystemState s = init_system(p);
  std::vector<double> u(5);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> at_threshold(5);
    for (std::size_t i = 0; i < 5; ++i) at_threshold[i] = reinforcement_probability(s, p, i);
    const auto all_red = step(s, p, at_threshold);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(all_red.red_counts[i], s.red_counts[i] + 1);
    draw_step_uniforms(src, 0, s.t, u);
    advance(s, p, u);
  }
}

TEST(Advance, ErrorsAndPurity) {
  const ModelParams p(3, 1, 1, 0.5);
  const auto s = init_system(p);
  const std::vector<double> two{0.1, 0.2};
  EXPECT_THROW((void)step(s, p, two), std::invalid_argument);
  const ModelParams other(4, 1, 1, 0.5);
  const std::vector<double> four(4, 0.1);
  EXPECT_THROW((void)step(s, other, four), std::invalid_argument);
  const std::vector<double> u{0.0, 0.99, 0.0};
  const auto next = step(s, p, u);
  EXPECT_EQ(s, init_system(p));
  EXPECT_EQ(next.red_counts, (std::vector<std::int64_t>{2, 1, 2}));
}

TEST(Advance, BallCountsGrowByOne) {
  const ModelParams p(6, 1, 2, 0.6);
  const UniformSource src(9);
  SystemState s = init_system(p);
  std::vector<double> u(6);
  for (int k = 0; k < 500; ++k) {
    const auto before = s;
    draw_step_uniforms(src, 0, s.t, u);
    advance(s, p, u);
    EXPECT_EQ(s.balls(p), before.balls(p) + 1);
    for (std::size_t i = 0; i < 6; ++i) {
      const auto d = s.red_counts[i] - before.red_counts[i];
      EXPECT_TRUE(d == 0 || d == 1);
    }
  }
}
