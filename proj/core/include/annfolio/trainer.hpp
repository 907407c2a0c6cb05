#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "annfolio/adam.hpp"
#include "annfolio/market.hpp"
#include "annfolio/policy_net.hpp"
#include "annfolio/utility.hpp"

namespace annfolio {

struct TrainingPhase {
  std::size_t steps = 0;
  std::size_t batch = 0;
  double step_size = 0.0;

  friend bool operator==(const TrainingPhase&, const TrainingPhase&) = default;
};

using TrainingSchedule = std::vector<TrainingPhase>;

/// Throws std::invalid_argument for an empty schedule or a non-positive field.
void validate_schedule(const TrainingSchedule& schedule);
std::size_t total_steps(const TrainingSchedule& schedule) noexcept;
/// Number of simulated paths (gradient samples) the schedule consumes.
std::size_t total_paths(const TrainingSchedule& schedule) noexcept;

/// Where a global step index falls in the schedule.
struct ScheduleCursor {
  std::size_t phase = 0;
  std::size_t step_in_phase = 0;
};
ScheduleCursor locate_step(const TrainingSchedule& schedule, std::uint64_t global_step);

struct TrainingRecord {
  std::size_t phase = 0;
  std::uint64_t step = 0;
  double J = 0.0;
  double grad_norm = 0.0;
  std::size_t floor_events = 0;
  double ms = 0.0;
};

struct ValidationRecord {
  std::uint64_t step = 0;
  double J = 0.0;
};

/// Resumable optimizer state. `steps_done` counts completed global steps.
struct TrainerState {
  PolicyParams theta;
  AdamState adam;
  std::uint64_t steps_done = 0;
};

/// Train from a fixed pre-simulated pool instead of re-simulating every step.
/// The last `validation_fraction` of the pool is held out and scored every
/// `validate_every` steps.
struct PoolOptions {
  std::size_t pool_paths = 0;
  double validation_fraction = 0.2;
  std::size_t validate_every = 50;
};

struct TrainOptions {
  std::uint64_t seed = 0;
  double sigma_init = 0.1;
  std::optional<PoolOptions> pool;
  /// Called after every completed step.
  std::function<void(const TrainerState&, const TrainingRecord&)> on_step;
};

struct TrainResult {
  TrainerState state;
  std::vector<TrainingRecord> log;
  std::vector<ValidationRecord> validation;
};

/// Substream ids reserved next to the per-step streams (seed, k).
inline constexpr std::uint64_t kInitStream = ~std::uint64_t{0};
inline constexpr std::uint64_t kPoolStream = ~std::uint64_t{0} - 1;

/// Initial optimizer state for `arch` under `options`.
TrainerState initial_trainer_state(const Architecture& arch, const TrainOptions& options);

/// Maximizes the empirical utility with Adam over the schedule's phases.
///
/// Step k draws its minibatch from substream (seed, k), so a run resumed from
/// a TrainerState continues exactly as the uninterrupted run would. Throws
/// std::runtime_error if J or the gradient becomes non-finite.
TrainResult train(const TrainingSchedule& schedule, const Architecture& arch, const Scenario& scenario,
                  const UtilitySpec& utility, const TrainOptions& options,
                  std::optional<TrainerState> resume = std::nullopt);

}  // namespace annfolio
