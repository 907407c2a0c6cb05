#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>

#include "annfolio/adam.hpp"
#include "annfolio/policy_net.hpp"

namespace annfolio {

/// Trained policy plus everything needed to evaluate or resume it.
///
/// Text layout, one item per line:
///
///     annfolio-checkpoint 1
///     widths 2 3 1
///     y_scale 1
///     seed 42
///     eta 1
///     horizon 1
///     model gbm
///     input_y 0.030976          (GBM only: the constant variance input)
///     config_hash 0123456789abcdef
///     cursor <steps_done> <phase> <step_in_phase>
///     params <count>
///     <one value per line, flat order>
///     adam <step> <beta1> <beta2> <delta>   (optional block)
///     m
///     <count values>
///     v
///     <count values>
///     end
///
/// Numbers use the shortest round-trip decimal form, so save/load is lossless.
struct Checkpoint {
  explicit Checkpoint(PolicyParams params) : theta(std::move(params)) {}

  PolicyParams theta;
  std::uint64_t seed = 0;
  double eta = 1.0;
  double horizon = 1.0;
  std::string model = "gbm";
  std::optional<double> input_y;
  std::string config_hash = "0000000000000000";
  std::uint64_t steps_done = 0;
  std::size_t phase = 0;
  std::size_t step_in_phase = 0;
  std::optional<AdamState> adam;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace annfolio
