#include <cmath>

#include <gtest/gtest.h>

#include <annfolio/objective.hpp>

#include "oracles.hpp"
#include "properties.hpp"

using namespace annfolio;

namespace {

NoiseBatch noise_for(const Scenario& s, std::size_t paths, std::uint64_t seed) {
  return NoiseBatch::generate(seed, paths, s.grid.steps(), s.params.rho(), s.grid.dt());
}

}  // namespace

TEST(BatchUtility, ZeroPolicyIsRisklessLog) {
  const Scenario s = props::gbm_scenario(2142);
  const PolicyParams zero(Architecture({2, 3, 1}));
  double w = 1.0;
  for (int k = 0; k < 2142; ++k) w *= 1.0 + 0.05 / 2142;
  for (std::uint64_t seed : {1u, 2u}) {
    EXPECT_EQ(batch_utility(zero, s, UtilitySpec{1.0}, noise_for(s, 4, seed)), std::log(w));
  }
  EXPECT_NEAR(std::log(w), 0.0499994, 1e-7);
}

TEST(BatchUtility, DegenerateMarketGivesZero) {
  Scenario s = props::gbm_scenario(30);
  s.params = MarketParams(GbmParams{0.0, 0.0, 0.0});
  const PolicyParams theta = init_params(Architecture({2, 3, 1}), 1.0, 2);
  EXPECT_EQ(batch_utility(theta, s, UtilitySpec{1.0}, noise_for(s, 5, 3)), 0.0);
}

TEST(BatchUtility, MatchesIndependentRollout) {
  for (const Scenario& s : {props::gbm_scenario(80), props::heston_scenario(80)}) {
    const PolicyParams theta = init_params(Architecture({2, 4, 1}), 0.5, 10);
    const auto g = props::gradient_against_oracle(s, theta, 3.0, 4, 12);
    EXPECT_TRUE(g.j_matches_oracle);
  }
}

TEST(Gradient, OutputBiasIsConstantShiftDerivative) {
  const Scenario s = props::gbm_scenario(50);
  const PolicyParams zero(Architecture({2, 3, 1}));
  const NoiseBatch noise = noise_for(s, 10, 7);
  const ObjectiveValue v = batch_utility_gradient(zero, s, UtilitySpec{1.0}, noise);
  const std::size_t bias = zero.bias_index(1, 0);
  auto j_at = [&](double c) {
    PolicyParams p = zero;
    p.flat()[bias] = c;
    return batch_utility(p, s, UtilitySpec{1.0}, noise);
  };
  const double fd = (j_at(1e-5) - j_at(-1e-5)) / 2e-5;
  EXPECT_NEAR(v.gradient[bias], fd, 1e-5 * std::abs(fd));
  EXPECT_NE(v.gradient[bias], 0.0);
  for (std::size_t i = 0; i < v.gradient.size(); ++i) {
    if (i == bias) continue;
    EXPECT_EQ(v.gradient[i], 0.0) << "coordinate " << i;
  }
}

TEST(Gradient, ZeroWhenPolicyCannotMatter) {
  Scenario s = props::gbm_scenario(40);
  s.params = MarketParams(GbmParams{0.05, 0.05, 0.0});
  const PolicyParams theta = init_params(Architecture({2, 3, 1}), 0.5, 1);
  const ObjectiveValue v = batch_utility_gradient(theta, s, UtilitySpec{2.0}, noise_for(s, 6, 2));
  for (double g : v.gradient) EXPECT_NEAR(g, 0.0, 1e-15);
}

TEST(Gradient, LengthMatchesParameterCount) {
  const Scenario s = props::heston_scenario(10);
  const PolicyParams theta = init_params(Architecture({2, 5, 1}), 0.1, 1);
  EXPECT_EQ(batch_utility_gradient(theta, s, UtilitySpec{1.0}, noise_for(s, 2, 1)).gradient.size(), 21u);
}

TEST(Gradient, AgreesWithLibraryFiniteDifferences) {
  const Scenario s = props::heston_scenario(50);
  const PolicyParams theta = init_params(Architecture({2, 5, 1}), 0.1, 44);
  const NoiseBatch noise = noise_for(s, 10, 45);
  const ObjectiveValue v = batch_utility_gradient(theta, s, UtilitySpec{0.5}, noise);
  const auto fd = finite_diff_gradient(theta, s, UtilitySpec{0.5}, noise, 1e-5);
  for (std::size_t i = 0; i < fd.size(); ++i) EXPECT_NEAR(v.gradient[i], fd[i], std::max(1e-5 * std::abs(fd[i]), 1e-8));
}

TEST(FiniteDiff, QuadraticIsExact) {
  auto f = [](std::span<const double> x) { return 3.0 * x[0] * x[0] - 2.0 * x[0] * x[1] + 0.5 * x[1] * x[1] + x[1]; };
  const std::vector<double> x{0.7, -1.3};
  const auto g = finite_diff_gradient(f, x, 1e-3);
  EXPECT_NEAR(g[0], 6.0 * 0.7 + 2.6, 1e-10);
  EXPECT_NEAR(g[1], -1.4 - 1.3 + 1.0, 1e-10);
}

TEST(FiniteDiff, ErrorCurveIsVShaped) {
  auto f = [](std::span<const double> x) { return std::exp(3.0 * x[0]); };
  const std::vector<double> x{1.0};
  const double exact = 3.0 * std::exp(3.0);
  double err[3];
  const double hs[3] = {1e-3, 1e-5, 1e-7};
  for (int i = 0; i < 3; ++i) err[i] = std::abs(finite_diff_gradient(f, x, hs[i])[0] - exact);
  EXPECT_LT(err[1], err[0]);
  EXPECT_LT(err[1], err[2]);
}
