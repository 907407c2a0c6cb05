#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "annfolio/autodiff.hpp"
#include "annfolio/rng.hpp"

namespace annfolio {

enum class ModelKind { gbm, heston };

std::string_view to_string(ModelKind kind) noexcept;

struct GbmParams {
  double r = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
};

struct HestonParams {
  double r = 0.0;
  double mu = 0.0;
  double kappa = 0.0;
  double theta = 0.0;
  double sigma_y = 0.0;
  double rho = 0.0;
};

/// SDE coefficients of either market model.
///
/// Constructing from a raw GbmParams/HestonParams does not validate, so the
/// stepper can be driven with degenerate coefficients (e.g. sigma_y = 0).
/// The named factories and validate() enforce the model invariants.
class MarketParams {
 public:
  MarketParams(GbmParams p) : model_(p) {}     // NOLINT
  MarketParams(HestonParams p) : model_(p) {}  // NOLINT

  static MarketParams gbm(double r, double mu, double sigma);
  static MarketParams heston(double r, double mu, double kappa, double theta, double sigma_y, double rho);

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;

  ModelKind kind() const noexcept { return is_gbm() ? ModelKind::gbm : ModelKind::heston; }
  bool is_gbm() const noexcept { return std::holds_alternative<GbmParams>(model_); }
  bool is_heston() const noexcept { return std::holds_alternative<HestonParams>(model_); }

  const GbmParams& gbm() const;
  const HestonParams& heston() const;

  double r() const noexcept;
  double mu() const noexcept;
  /// Increment correlation; 0 for GBM.
  double rho() const noexcept;
  /// sigma^2 for GBM, theta for Heston.
  double long_run_variance() const noexcept;

 private:
  std::variant<GbmParams, HestonParams> model_;
};

/// Equispaced grid t_k = k * dt, k = 0..n, dt = T / n.
class TimeGrid {
 public:
  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  double dt() const noexcept { return dt_; }
  double t(std::size_t k) const noexcept { return static_cast<double>(k) * dt_; }

 private:
  friend TimeGrid make_time_grid(double horizon, std::size_t steps);
  TimeGrid(double horizon, std::size_t steps) noexcept
      : horizon_(horizon), steps_(steps), dt_(horizon / static_cast<double>(steps)) {}

  double horizon_;
  std::size_t steps_;
  double dt_;
};

TimeGrid make_time_grid(double horizon, std::size_t steps);

struct MarketState {
  double P = 1.0;  // riskless price
  double S = 1.0;  // risky price
  double Y = 0.0;  // squared volatility
};

/// Starting values of a simulation. A NaN y0 means "use the model's long-run
/// variance" (sigma^2 under GBM, theta under Heston).
struct InitialConditions {
  double p0 = 1.0;
  double s0 = 4770.0;
  double y0 = std::numeric_limits<double>::quiet_NaN();
  double w0 = 1.0;
};

MarketState initial_state(const MarketParams& params, const InitialConditions& init);

/// Everything a rollout needs besides the policy and the noise.
struct Scenario {
  MarketParams params;
  TimeGrid grid;
  InitialConditions init{};
};

struct IncrementPair {
  double dBS = 0.0;
  double dBY = 0.0;
};

/// Correlated Gaussian increment number `counter` of `stream`:
/// dBS = sqrt(dt) Z1, dBY = sqrt(dt) (rho Z1 + sqrt(1 - rho^2) Z2).
IncrementPair correlated_increment(double rho, double dt, const CounterStream& stream, std::uint64_t counter);

/// `count` consecutive increments of `stream` starting at counter `first`.
std::vector<IncrementPair> draw_increments(double rho, double dt, std::size_t count, const CounterStream& stream,
                                           std::uint64_t first = 0);

/// Stream that feeds path `path` of a batch seeded with `seed`.
CounterStream path_stream(std::uint64_t seed, std::uint64_t path) noexcept;

/// Writes increments 0..out.size()-1 of path `path` into `out`.
void fill_path_increments(std::uint64_t seed, std::uint64_t path, double rho, double dt,
                          std::span<IncrementPair> out);

/// B paths x n steps of increments, regenerable from (seed, path, step).
class NoiseBatch {
 public:
  static NoiseBatch generate(std::uint64_t seed, std::size_t paths, std::size_t steps, double rho, double dt);

  /// Subset of another batch's paths, in the given order.
  static NoiseBatch select(const NoiseBatch& source, std::span<const std::size_t> path_indices);

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t paths() const noexcept { return paths_; }
  std::size_t steps() const noexcept { return steps_; }

  std::span<const IncrementPair> path(std::size_t b) const noexcept {
    return {data_.data() + b * steps_, steps_};
  }

 private:
  std::uint64_t seed_ = 0;
  std::size_t paths_ = 0;
  std::size_t steps_ = 0;
  std::vector<IncrementPair> data_;
};

/// Per-period simple returns (Delta P / P, Delta S / S) of one Euler step.
struct PeriodReturns {
  double riskless = 0.0;
  double risky = 0.0;
};

inline PeriodReturns period_returns(const MarketState& state, const MarketParams& params, const IncrementPair& inc,
                                    double dt) noexcept {
  const double vol = std::sqrt(std::max(state.Y, 0.0));
  return {dt * params.r(), dt * params.mu() + vol * inc.dBS};
}

/// One Euler-Maruyama step with full truncation of the variance.
MarketState step_market(const MarketState& state, const MarketParams& params, const IncrementPair& inc, double dt);

/// True iff 2 kappa theta > sigma_Y^2. Throws for GBM parameters.
bool check_feller(const MarketParams& params);

inline constexpr double kWealthFloor = 1e-6;

/// Self-financing wealth update w (1 + (1 - pi) dP/P + pi dS/S), floored at
/// kWealthFloor. A floored result is returned as a constant, so no derivative
/// flows through it.
template <class T>
T step_wealth(const T& wealth, const T& weight, double riskless_return, double risky_return,
              std::size_t* floor_events = nullptr) {
  T next = wealth * (1.0 + (1.0 - weight) * riskless_return + weight * risky_return);
  if (ad::value_of(next) < kWealthFloor) {
    if (floor_events != nullptr) ++*floor_events;
    return T(kWealthFloor);
  }
  return next;
}

/// One row of a retained trajectory.
struct PathPoint {
  double t = 0.0;
  double S = 0.0;
  double Y = 0.0;
  double P = 0.0;
  double W = 0.0;
  double pi = 0.0;
};

/// Rolls one path forward under `policy(t, y)` and returns terminal wealth.
///
/// The policy sees the truncated variance max(Y, 0). Scalar is double for
/// plain simulation and ad::Var for gradient recording; both instantiations
/// perform the same floating-point operations in the same order.
template <class Scalar, class PolicyFn>
Scalar simulate_path(const Scenario& scenario, std::span<const IncrementPair> noise, PolicyFn&& policy,
                     std::size_t& floor_events, std::vector<PathPoint>* trace = nullptr) {
  const TimeGrid& grid = scenario.grid;
  const double dt = grid.dt();
  MarketState state = initial_state(scenario.params, scenario.init);
  Scalar wealth(scenario.init.w0);
  if (trace != nullptr) {
    trace->clear();
    trace->reserve(grid.steps() + 1);
  }
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double t = grid.t(k);
    const Scalar weight = policy(t, std::max(state.Y, 0.0));
    if (trace != nullptr) {
      trace->push_back({t, state.S, state.Y, state.P, ad::value_of(wealth), ad::value_of(weight)});
    }
    const PeriodReturns ret = period_returns(state, scenario.params, noise[k], dt);
    wealth = step_wealth(wealth, weight, ret.riskless, ret.risky, &floor_events);
    state = step_market(state, scenario.params, noise[k], dt);
  }
  if (trace != nullptr) {
    const double t = grid.t(grid.steps());
    trace->push_back({t, state.S, state.Y, state.P, ad::value_of(wealth),
                      ad::value_of(policy(t, std::max(state.Y, 0.0)))});
  }
  return wealth;
}

using PolicyFunction = std::function<double(double t, double y)>;

struct SimulationResult {
  std::vector<double> terminal_wealth;
  std::size_t floor_events = 0;
  std::vector<std::vector<PathPoint>> paths;  // only when requested
};

/// Simulates `paths` independent paths; path b uses path_stream(seed, b).
SimulationResult simulate_batch(const Scenario& scenario, const PolicyFunction& policy, std::size_t paths,
                                std::uint64_t seed, bool keep_paths = false);

}  // namespace annfolio
