#include "annfolio/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "annfolio/objective.hpp"
#include "annfolio/rng.hpp"

namespace annfolio {

void validate_schedule(const TrainingSchedule& schedule) {
  if (schedule.empty()) throw std::invalid_argument("schedule: at least one phase is required");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const TrainingPhase& p = schedule[i];
    if (p.steps == 0 || p.batch == 0 || !(p.step_size > 0.0) || !std::isfinite(p.step_size)) {
      throw std::invalid_argument("schedule: phase " + std::to_string(i) +
                                  " needs positive steps, batch and step_size");
    }
  }
}

std::size_t total_steps(const TrainingSchedule& schedule) noexcept {
  return std::accumulate(schedule.begin(), schedule.end(), std::size_t{0},
                         [](std::size_t acc, const TrainingPhase& p) { return acc + p.steps; });
}

std::size_t total_paths(const TrainingSchedule& schedule) noexcept {
  return std::accumulate(schedule.begin(), schedule.end(), std::size_t{0},
                         [](std::size_t acc, const TrainingPhase& p) { return acc + p.steps * p.batch; });
}

ScheduleCursor locate_step(const TrainingSchedule& schedule, std::uint64_t global_step) {
  std::uint64_t remaining = global_step;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (remaining < schedule[i].steps) return {i, static_cast<std::size_t>(remaining)};
    remaining -= schedule[i].steps;
  }
  throw std::out_of_range("schedule: step " + std::to_string(global_step) + " is past the end");
}

TrainerState initial_trainer_state(const Architecture& arch, const TrainOptions& options) {
  return TrainerState{init_params(arch, options.sigma_init, derive_seed(options.seed, kInitStream)),
                      AdamState(param_count(arch)), 0};
}

namespace {

double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

struct Pool {
  NoiseBatch noise;
  std::size_t train_paths = 0;
  NoiseBatch validation;
};

Pool make_pool(const PoolOptions& opts, const Scenario& scenario, std::uint64_t seed) {
  if (opts.pool_paths < 2) throw std::invalid_argument("pool: need at least two pooled paths");
  if (!(opts.validation_fraction > 0.0 && opts.validation_fraction < 1.0)) {
    throw std::invalid_argument("pool: validation_fraction must lie in (0, 1)");
  }
  Pool pool;
  pool.noise = NoiseBatch::generate(derive_seed(seed, kPoolStream), opts.pool_paths, scenario.grid.steps(),
                                    scenario.params.rho(), scenario.grid.dt());
  auto n_val = static_cast<std::size_t>(std::llround(opts.validation_fraction * static_cast<double>(opts.pool_paths)));
  n_val = std::clamp<std::size_t>(n_val, 1, opts.pool_paths - 1);
  pool.train_paths = opts.pool_paths - n_val;
  std::vector<std::size_t> held_out(n_val);
  std::iota(held_out.begin(), held_out.end(), pool.train_paths);
  pool.validation = NoiseBatch::select(pool.noise, held_out);
  return pool;
}

}  // namespace

TrainResult train(const TrainingSchedule& schedule, const Architecture& arch, const Scenario& scenario,
                  const UtilitySpec& utility, const TrainOptions& options, std::optional<TrainerState> resume) {
  validate_schedule(schedule);
  scenario.params.validate();
  utility.validate();

  TrainResult result{resume ? std::move(*resume) : initial_trainer_state(arch, options), {}, {}};
  TrainerState& state = result.state;
  if (!(state.theta.arch() == arch)) throw std::invalid_argument("train: resumed parameters have another architecture");
  if (state.adam.m.size() != state.theta.size()) throw std::invalid_argument("train: Adam state does not match theta");

  std::optional<Pool> pool;
  if (options.pool) pool = make_pool(*options.pool, scenario, options.seed);

  const std::uint64_t end = total_steps(schedule);
  result.log.reserve(static_cast<std::size_t>(end - std::min(end, state.steps_done)));
  std::vector<std::size_t> picks;
  for (std::uint64_t k = state.steps_done; k < end; ++k) {
    const auto started = std::chrono::steady_clock::now();
    const ScheduleCursor cursor = locate_step(schedule, k);
    const TrainingPhase& phase = schedule[cursor.phase];
    const std::uint64_t step_seed = derive_seed(options.seed, k);

    NoiseBatch noise;
    if (pool) {
      const CounterStream picker(step_seed);
      picks.resize(phase.batch);
      for (std::size_t b = 0; b < phase.batch; ++b) picks[b] = picker.word(b) % pool->train_paths;
      noise = NoiseBatch::select(pool->noise, picks);
    } else {
      noise = NoiseBatch::generate(step_seed, phase.batch, scenario.grid.steps(), scenario.params.rho(),
                                   scenario.grid.dt());
    }

    const ObjectiveValue value = batch_utility_gradient(state.theta, scenario, utility, noise);
    if (!std::isfinite(value.J)) {
      throw std::runtime_error("train: objective became non-finite at step " + std::to_string(k) + " (phase " +
                               std::to_string(cursor.phase) + ")");
    }
    adam_step(state.adam, state.theta.flat(), value.gradient, phase.step_size);
    state.steps_done = k + 1;

    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    result.log.push_back({cursor.phase, k, value.J, l2_norm(value.gradient), value.floor_events, ms});

    if (pool && options.pool->validate_every > 0 && (k + 1) % options.pool->validate_every == 0) {
      result.validation.push_back({k, batch_utility(state.theta, scenario, utility, pool->validation)});
    }
    if (options.on_step) options.on_step(state, result.log.back());
  }
  return result;
}

}  // namespace annfolio
