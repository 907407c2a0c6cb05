#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include <annfolio/market.hpp>
#include <annfolio/policy_net.hpp>

#include "oracles.hpp"
#include "properties.hpp"

using namespace annfolio;

TEST(TimeGrid, StepIsHorizonOverCount) {
  EXPECT_DOUBLE_EQ(make_time_grid(1.0, 2142).dt(), 1.0 / 2142.0);
  EXPECT_NEAR(make_time_grid(1.0, 2142).dt(), 4.668e-4, 1e-7);
  EXPECT_EQ(make_time_grid(1.0, 1).dt(), 1.0);
  EXPECT_DOUBLE_EQ(make_time_grid(2.0, 504).dt(), 1.0 / 252.0);
  const TimeGrid g = make_time_grid(1.0, 2142);
  EXPECT_NEAR(g.t(g.steps()), 1.0, 1e-15);
}

TEST(TimeGrid, RejectsNonPositiveInputs) {
  EXPECT_THROW(make_time_grid(0.0, 10), std::invalid_argument);
  EXPECT_THROW(make_time_grid(-1.0, 10), std::invalid_argument);
  EXPECT_THROW(make_time_grid(1.0, 0), std::invalid_argument);
}

TEST(Increments, PerfectCorrelationCopiesStockIncrement) {
  const auto inc = draw_increments(1.0, 0.01, 1000, path_stream(1, 0));
  for (const auto& p : inc) EXPECT_EQ(p.dBS, p.dBY);
}

TEST(Increments, IndependentWhenRhoIsZero) {
  const auto inc = draw_increments(0.0, 1.0, 100000, path_stream(2, 0));
  double sxy = 0, sxx = 0, syy = 0;
  for (const auto& p : inc) {
    sxy += p.dBS * p.dBY;
    sxx += p.dBS * p.dBS;
    syy += p.dBY * p.dBY;
  }
  EXPECT_LT(std::abs(sxy / std::sqrt(sxx * syy)), 0.01);
}

TEST(Increments, RejectsInvalidCorrelation) {
  EXPECT_THROW(draw_increments(1.01, 0.01, 3, path_stream(1, 0)), std::invalid_argument);
  EXPECT_THROW(draw_increments(-2.0, 0.01, 3, path_stream(1, 0)), std::invalid_argument);
  EXPECT_THROW(draw_increments(0.0, 0.0, 3, path_stream(1, 0)), std::invalid_argument);
}

TEST(Increments, RegenerableFromSeedPathStep) {
  const NoiseBatch batch = NoiseBatch::generate(99, 4, 30, -0.5, 0.01);
  const auto again = draw_increments(-0.5, 0.01, 1, path_stream(99, 2), 17);
  EXPECT_EQ(batch.path(2)[17].dBS, again[0].dBS);
  EXPECT_EQ(batch.path(2)[17].dBY, again[0].dBY);
  std::set<double> distinct;
  for (std::size_t b = 0; b < 4; ++b) distinct.insert(batch.path(b)[0].dBS);
  EXPECT_EQ(distinct.size(), 4u);
}

TEST(StepMarket, RisklessCompounding) {
  const MarketParams p = MarketParams::gbm(0.05, 0.085, 0.176);
  const MarketState s = step_market(MarketState{1.0, 100.0, 0.030976}, p, {0.0, 0.0}, 1.0 / 2142);
  EXPECT_DOUBLE_EQ(s.P, 1.0 + 0.05 / 2142);
  EXPECT_NEAR(s.P, 1.00002334, 1e-8);
  EXPECT_EQ(s.Y, 0.176 * 0.176);
}

TEST(StepMarket, HestonDriftFixedPointAtTheta) {
  const MarketParams p = MarketParams::heston(0.05, 0.089, 10.5, 0.0438, 0.564, -0.712);
  const MarketState s = step_market(MarketState{1.0, 1.0, 0.0438}, p, {0.0, 0.0}, 0.01);
  EXPECT_EQ(s.Y, 0.0438);
}

TEST(StepMarket, HestonDriftStep) {
  const MarketParams p = MarketParams::heston(0.05, 0.089, 10.5, 0.0438, 0.564, -0.712);
  const MarketState s = step_market(MarketState{1.0, 1.0, 0.0155}, p, {0.013, 0.0}, 1.0 / 2142);
  EXPECT_NEAR(s.Y, 0.0155 + (1.0 / 2142) * 10.5 * (0.0438 - 0.0155), 1e-15);
  EXPECT_NEAR(s.Y, 0.0156387, 1e-7);
}

TEST(StepMarket, StockUsesTruncatedVariance) {
  const MarketParams p = MarketParams::heston(0.0, 0.1, 1.0, 0.04, 0.5, 0.0);
  const MarketState s = step_market(MarketState{1.0, 50.0, -0.01}, p, {0.3, 0.2}, 0.1);
  EXPECT_DOUBLE_EQ(s.S, 50.0 * (1.0 + 0.1 * 0.1));  // sqrt(max(Y,0)) = 0
  EXPECT_DOUBLE_EQ(s.Y, -0.01 + 0.1 * 1.0 * (0.04 + 0.01));  // signed Y in the drift
}

TEST(StepWealth, Examples) {
  const double rp = 0.05 / 2142;
  EXPECT_EQ(step_wealth(1.3, 0.0, rp, 0.02), 1.3 * (1.0 + rp));
  EXPECT_NEAR(step_wealth(1.0, 0.5, rp, 0.001), 1.00051167, 1e-8);
  EXPECT_DOUBLE_EQ(step_wealth(2.0, 1.0, rp, -0.03), 2.0 * (1.0 - 0.03));
}

TEST(StepWealth, FloorCountsEvents) {
  std::size_t events = 0;
  EXPECT_EQ(step_wealth(1.0, 10.0, 0.0, -0.2, &events), kWealthFloor);
  EXPECT_EQ(events, 1u);
  step_wealth(1.0, 0.5, 0.0, 0.01, &events);
  EXPECT_EQ(events, 1u);
}

TEST(SimulateBatch, ZeroPolicyCompoundsRiskless) {
  const Scenario s = props::gbm_scenario(2142);
  const auto res = simulate_batch(s, [](double, double) { return 0.0; }, 8, 123);
  double loop = 1.0;
  for (int k = 0; k < 2142; ++k) loop *= 1.0 + 0.05 / 2142;
  for (double w : res.terminal_wealth) EXPECT_EQ(w, loop);
  EXPECT_NEAR(loop, 1.0512705, 1e-7);
  EXPECT_EQ(res.floor_events, 0u);
}

TEST(SimulateBatch, FiveHestonPathsAreDistinctAndKept) {
  const Scenario s = props::heston_scenario(252);
  const auto res = simulate_batch(s, [](double, double) { return 1.0; }, 5, 2024, true);
  ASSERT_EQ(res.paths.size(), 5u);
  std::set<double> ends;
  for (const auto& p : res.paths) {
    ASSERT_EQ(p.size(), 253u);
    EXPECT_EQ(p.front().S, 4770.0);
    EXPECT_EQ(p.front().Y, 0.0155);
    for (const auto& pt : p) EXPECT_GT(pt.S, 0.0);
    ends.insert(p.back().S);
  }
  EXPECT_EQ(ends.size(), 5u);
}

TEST(SimulateBatch, MatchesIndependentRollout) {
  const Scenario s = props::heston_scenario(120);
  const PolicyParams theta = init_params(Architecture({2, 5, 1}), 0.4, 77);
  const auto res = simulate_batch(s, [&](double t, double y) { return forward(theta, t, y, 1.0); }, 6, 5);
  oracle::Market m = oracle::table3_heston();
  const oracle::Net net{theta.arch().widths(), {theta.flat().begin(), theta.flat().end()}, 1.0};
  for (std::size_t b = 0; b < 6; ++b) {
    std::vector<std::pair<double, double>> noise;
    for (const auto& inc : draw_increments(-0.712, s.grid.dt(), 120, path_stream(5, b))) noise.emplace_back(inc.dBS, inc.dBY);
    const double w = oracle::rollout(m, net, 1.0, noise);
    EXPECT_NEAR(res.terminal_wealth[b], w, 1e-13 * w);
  }
}

TEST(Feller, Examples) {
  EXPECT_TRUE(check_feller(MarketParams::heston(0.05, 0.089, 10.5, 0.0438, 0.564, -0.712)));
  EXPECT_FALSE(check_feller(MarketParams::heston(0.0, 0.0, 1.0, 0.5, 1.0, 0.0)));
  EXPECT_FALSE(check_feller(MarketParams::heston(0.0, 0.0, 0.1, 0.01, 1.0, 0.0)));
  EXPECT_THROW(check_feller(MarketParams::gbm(0.05, 0.085, 0.176)), std::invalid_argument);
}

TEST(MarketParams, ValidationNamesTheInvariant) {
  EXPECT_THROW(MarketParams::gbm(0.05, 0.085, 0.0), std::invalid_argument);
  EXPECT_THROW(MarketParams::heston(0.05, 0.089, -1.0, 0.04, 0.5, 0.0), std::invalid_argument);
  EXPECT_THROW(MarketParams::heston(0.05, 0.089, 1.0, 0.04, 0.5, 1.5), std::invalid_argument);
  EXPECT_THROW(MarketParams::gbm(std::nan(""), 0.085, 0.1), std::invalid_argument);
  EXPECT_NO_THROW(MarketParams::heston(0.05, 0.089, 1.0, 0.04, 0.5, -1.0));
}
