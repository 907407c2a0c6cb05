#include "annfolio/market.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace annfolio {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

std::string_view to_string(ModelKind kind) noexcept {
  return kind == ModelKind::gbm ? "gbm" : "heston";
}

MarketParams MarketParams::gbm(double r, double mu, double sigma) {
  MarketParams p(GbmParams{r, mu, sigma});
  p.validate();
  return p;
}

MarketParams MarketParams::heston(double r, double mu, double kappa, double theta, double sigma_y, double rho) {
  MarketParams p(HestonParams{r, mu, kappa, theta, sigma_y, rho});
  p.validate();
  return p;
}

void MarketParams::validate() const {
  require(std::isfinite(r()), "market: r must be finite");
  require(std::isfinite(mu()), "market: mu must be finite");
  if (const auto* g = std::get_if<GbmParams>(&model_)) {
    require(std::isfinite(g->sigma) && g->sigma > 0.0, "market: GBM sigma must be > 0");
    return;
  }
  const auto& h = std::get<HestonParams>(model_);
  require(std::isfinite(h.kappa) && h.kappa > 0.0, "market: Heston kappa must be > 0");
  require(std::isfinite(h.theta) && h.theta > 0.0, "market: Heston theta must be > 0");
  require(std::isfinite(h.sigma_y) && h.sigma_y > 0.0, "market: Heston sigma_y must be > 0");
  require(h.rho >= -1.0 && h.rho <= 1.0, "market: Heston rho must lie in [-1, 1]");
}

const GbmParams& MarketParams::gbm() const {
  if (const auto* g = std::get_if<GbmParams>(&model_)) return *g;
  throw std::invalid_argument("market: GBM parameters requested from a Heston model");
}

const HestonParams& MarketParams::heston() const {
  if (const auto* h = std::get_if<HestonParams>(&model_)) return *h;
  throw std::invalid_argument("market: Heston parameters requested from a GBM model");
}

double MarketParams::r() const noexcept {
  return std::visit([](const auto& p) { return p.r; }, model_);
}

double MarketParams::mu() const noexcept {
  return std::visit([](const auto& p) { return p.mu; }, model_);
}

double MarketParams::rho() const noexcept {
  if (const auto* h = std::get_if<HestonParams>(&model_)) return h->rho;
  return 0.0;
}

double MarketParams::long_run_variance() const noexcept {
  if (const auto* h = std::get_if<HestonParams>(&model_)) return h->theta;
  const auto& g = std::get<GbmParams>(model_);
  return g.sigma * g.sigma;
}

TimeGrid make_time_grid(double horizon, std::size_t steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("time grid: horizon must be > 0");
  if (steps == 0) throw std::invalid_argument("time grid: step count must be >= 1");
  return TimeGrid(horizon, steps);
}

MarketState initial_state(const MarketParams& params, const InitialConditions& init) {
  MarketState s;
  s.P = init.p0;
  s.S = init.s0;
  if (params.is_gbm()) {
    s.Y = params.long_run_variance();
  } else {
    s.Y = std::isnan(init.y0) ? params.long_run_variance() : init.y0;
  }
  return s;
}

IncrementPair correlated_increment(double rho, double dt, const CounterStream& stream, std::uint64_t counter) {
  const auto [z1, z2] = stream.normal_pair(counter);
  const double scale = std::sqrt(dt);
  const double orth = std::sqrt(1.0 - rho * rho);
  return {scale * z1, scale * (rho * z1 + orth * z2)};
}

std::vector<IncrementPair> draw_increments(double rho, double dt, std::size_t count, const CounterStream& stream,
                                           std::uint64_t first) {
  require(rho >= -1.0 && rho <= 1.0, "increments: |rho| must not exceed 1");
  require(dt > 0.0, "increments: dt must be > 0");
  std::vector<IncrementPair> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = correlated_increment(rho, dt, stream, first + i);
  return out;
}

CounterStream path_stream(std::uint64_t seed, std::uint64_t path) noexcept {
  return CounterStream(derive_seed(seed, path));
}

void fill_path_increments(std::uint64_t seed, std::uint64_t path, double rho, double dt,
                          std::span<IncrementPair> out) {
  const CounterStream stream = path_stream(seed, path);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = correlated_increment(rho, dt, stream, k);
}

NoiseBatch NoiseBatch::generate(std::uint64_t seed, std::size_t paths, std::size_t steps, double rho, double dt) {
  require(rho >= -1.0 && rho <= 1.0, "noise batch: |rho| must not exceed 1");
  require(dt > 0.0, "noise batch: dt must be > 0");
  NoiseBatch batch;
  batch.seed_ = seed;
  batch.paths_ = paths;
  batch.steps_ = steps;
  batch.data_.resize(paths * steps);
  for (std::size_t b = 0; b < paths; ++b) {
    fill_path_increments(seed, b, rho, dt, std::span<IncrementPair>(batch.data_.data() + b * steps, steps));
  }
  return batch;
}

NoiseBatch NoiseBatch::select(const NoiseBatch& source, std::span<const std::size_t> path_indices) {
  NoiseBatch batch;
  batch.seed_ = source.seed_;
  batch.paths_ = path_indices.size();
  batch.steps_ = source.steps_;
  batch.data_.reserve(batch.paths_ * batch.steps_);
  for (std::size_t idx : path_indices) {
    if (idx >= source.paths_) throw std::out_of_range("noise batch: path index out of range");
    const auto p = source.path(idx);
    batch.data_.insert(batch.data_.end(), p.begin(), p.end());
  }
  return batch;
}

MarketState step_market(const MarketState& state, const MarketParams& params, const IncrementPair& inc, double dt) {
  const PeriodReturns ret = period_returns(state, params, inc, dt);
  MarketState next;
  next.P = (1.0 + ret.riskless) * state.P;
  next.S = state.S * (1.0 + ret.risky);
  if (params.is_gbm()) {
    next.Y = params.long_run_variance();
  } else {
    const HestonParams& h = params.heston();
    const double vol = std::sqrt(std::max(state.Y, 0.0));
    next.Y = state.Y + dt * h.kappa * (h.theta - state.Y) + h.sigma_y * vol * inc.dBY;
  }
  return next;
}

bool check_feller(const MarketParams& params) {
  const HestonParams& h = params.heston();
  return 2.0 * h.kappa * h.theta > h.sigma_y * h.sigma_y;
}

SimulationResult simulate_batch(const Scenario& scenario, const PolicyFunction& policy, std::size_t paths,
                                std::uint64_t seed, bool keep_paths) {
  require(paths >= 1, "simulate: need at least one path");
  scenario.params.validate();
  SimulationResult result;
  result.terminal_wealth.resize(paths);
  if (keep_paths) result.paths.resize(paths);
  std::vector<IncrementPair> noise(scenario.grid.steps());
  for (std::size_t b = 0; b < paths; ++b) {
    fill_path_increments(seed, b, scenario.params.rho(), scenario.grid.dt(), noise);
    result.terminal_wealth[b] = simulate_path<double>(scenario, noise, policy, result.floor_events,
                                                      keep_paths ? &result.paths[b] : nullptr);
  }
  return result;
}

}  // namespace annfolio
