#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "annfolio/baselines.hpp"
#include "annfolio/market.hpp"
#include "annfolio/utility.hpp"

namespace annfolio {

/// Monte Carlo estimate of expected terminal utility.
struct EvalReport {
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(n_rep)
  std::size_t n_rep = 0;
  std::uint64_t seed = 0;
  std::size_t floor_events = 0;
};

/// Simulates `n_rep` independent paths (path b driven by path_stream(seed, b))
/// under `policy`. Two policies evaluated with the same seed see identical
/// increments.
EvalReport evaluate_policy(const Policy& policy, const Scenario& scenario, const UtilitySpec& utility,
                           std::size_t n_rep, std::uint64_t seed);

struct ProfilePoint {
  double t = 0.0;
  double y = 0.0;
  double pi = 0.0;
};

/// Policy evaluated on the Cartesian product of the grids (t outer, y inner).
std::vector<ProfilePoint> weight_profile(const Policy& policy, const MarketParams& params, double horizon,
                                         std::span<const double> t_grid, std::span<const double> y_grid);

/// Mean weight over `points` equispaced times in [0, horizon] at fixed y.
double time_averaged_weight(const Policy& policy, const MarketParams& params, double horizon, double y,
                            std::size_t points = 500);

struct WealthTrajectories {
  std::string policy;
  std::vector<std::vector<double>> paths;  // paths[b][k], k = 0..n
};

/// Wealth paths of every policy on common increments.
std::vector<WealthTrajectories> wealth_paths_export(std::span<const Policy> policies, const Scenario& scenario,
                                                    std::size_t n_paths, std::uint64_t seed);

struct VarianceBand {
  double lower = 0.0;
  double upper = 0.0;
};

/// Average over simulated paths of each path's (1-coverage)/2 and
/// (1+coverage)/2 empirical quantiles of Y.
VarianceBand average_pathwise_range(const Scenario& scenario, std::size_t n_paths, std::uint64_t seed,
                                    double coverage = 0.95);

/// `count` equispaced points from `first` to `last` inclusive.
std::vector<double> linspace(double first, double last, std::size_t count);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least-squares line through (x, y).
LineFit least_squares_line(std::span<const double> x, std::span<const double> y);

}  // namespace annfolio
