#include "annfolio/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace annfolio {

EvalReport evaluate_policy(const Policy& policy, const Scenario& scenario, const UtilitySpec& utility,
                           std::size_t n_rep, std::uint64_t seed) {
  if (n_rep < 2) throw std::invalid_argument("evaluate: need at least two replications");
  scenario.params.validate();
  utility.validate();

  const PolicyFunction fn = policy.bind(scenario);
  std::vector<IncrementPair> noise(scenario.grid.steps());
  EvalReport report;
  report.n_rep = n_rep;
  report.seed = seed;

  // Welford: identical utilities give exactly zero spread.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t b = 0; b < n_rep; ++b) {
    fill_path_increments(seed, b, scenario.params.rho(), scenario.grid.dt(), noise);
    const double wealth = simulate_path<double>(scenario, noise, fn, report.floor_events);
    const double u = isoelastic_utility(wealth, utility);
    const double delta = u - mean;
    mean += delta / static_cast<double>(b + 1);
    m2 += delta * (u - mean);
  }
  report.mean = mean;
  const double n = static_cast<double>(n_rep);
  report.std_error = std::sqrt(m2 / (n - 1.0)) / std::sqrt(n);
  return report;
}

std::vector<ProfilePoint> weight_profile(const Policy& policy, const MarketParams& params, double horizon,
                                         std::span<const double> t_grid, std::span<const double> y_grid) {
  if (t_grid.empty() || y_grid.empty()) throw std::invalid_argument("profile: grids must be non-empty");
  std::vector<ProfilePoint> out;
  out.reserve(t_grid.size() * y_grid.size());
  for (double t : t_grid) {
    for (double y : y_grid) out.push_back({t, y, policy.weight(t, y, params, horizon)});
  }
  return out;
}

double time_averaged_weight(const Policy& policy, const MarketParams& params, double horizon, double y,
                            std::size_t points) {
  if (points < 2) throw std::invalid_argument("time average: need at least two points");
  double total = 0.0;
  for (double t : linspace(0.0, horizon, points)) total += policy.weight(t, y, params, horizon);
  return total / static_cast<double>(points);
}

std::vector<WealthTrajectories> wealth_paths_export(std::span<const Policy> policies, const Scenario& scenario,
                                                    std::size_t n_paths, std::uint64_t seed) {
  if (n_paths < 1) throw std::invalid_argument("wealth paths: need at least one path");
  std::vector<WealthTrajectories> out;
  out.reserve(policies.size());
  for (const Policy& policy : policies) {
    const SimulationResult sim = simulate_batch(scenario, policy.bind(scenario), n_paths, seed, true);
    WealthTrajectories traj{policy.name(), {}};
    traj.paths.reserve(n_paths);
    for (const auto& path : sim.paths) {
      std::vector<double> w(path.size());
      std::transform(path.begin(), path.end(), w.begin(), [](const PathPoint& p) { return p.W; });
      traj.paths.push_back(std::move(w));
    }
    out.push_back(std::move(traj));
  }
  return out;
}

namespace {

/// Linear-interpolated empirical quantile of sorted data (type 7).
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

VarianceBand average_pathwise_range(const Scenario& scenario, std::size_t n_paths, std::uint64_t seed,
                                    double coverage) {
  if (n_paths < 1) throw std::invalid_argument("variance band: need at least one path");
  if (!(coverage > 0.0 && coverage < 1.0)) throw std::invalid_argument("variance band: coverage must be in (0, 1)");
  const SimulationResult sim =
      simulate_batch(scenario, [](double, double) { return 0.0; }, n_paths, seed, true);
  VarianceBand band;
  std::vector<double> ys;
  for (const auto& path : sim.paths) {
    ys.resize(path.size());
    std::transform(path.begin(), path.end(), ys.begin(), [](const PathPoint& p) { return p.Y; });
    std::sort(ys.begin(), ys.end());
    band.lower += quantile_sorted(ys, 0.5 * (1.0 - coverage));
    band.upper += quantile_sorted(ys, 0.5 * (1.0 + coverage));
  }
  band.lower /= static_cast<double>(n_paths);
  band.upper /= static_cast<double>(n_paths);
  return band;
}

std::vector<double> linspace(double first, double last, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {first};
  std::vector<double> out(count);
  const double step = (last - first) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = first + step * static_cast<double>(i);
  out.back() = last;
  return out;
}

LineFit least_squares_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("line fit: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("line fit: x values are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

}  // namespace annfolio
