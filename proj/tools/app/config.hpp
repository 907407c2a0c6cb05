#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <annfolio/market.hpp>
#include <annfolio/trainer.hpp>

namespace annfolio::app {

/// Raised for any schema violation; the message names the offending key path.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CalibrationInputs {
  std::string prices;              // date,adj_close
  std::optional<std::string> vix;  // date,vix_close (Heston only)
  double dt = 1.0 / 252.0;
  std::vector<std::string> models;  // subset of {"gbm", "heston"}
};

struct PolicyConfig {
  std::vector<std::size_t> hidden{3};
  double sigma_init = 0.1;
  double y_scale = 1.0;
};

struct TrainingConfig {
  std::size_t checkpoint_every = 0;  // 0 disables periodic checkpoints
  std::optional<PoolOptions> pool;
};

struct EvaluationConfig {
  std::size_t reps = 10000;
  std::vector<std::string> policies{"analytic"};
  std::size_t wealth_paths = 0;
  std::size_t path_dump = 0;
};

struct ProfileConfig {
  std::vector<double> t_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> y_grid;  // empty: the model's long-run variance only
  std::size_t average_points = 500;
};

/// Everything one experiment needs; every command reads the same file.
struct ExperimentConfig {
  // Paths are kept as written and resolved against base_dir when used, so the
  // hash does not depend on where the checkout lives.
  std::filesystem::path base_dir;
  std::optional<ModelKind> model;  // absent when the file only drives calibration
  std::optional<MarketParams> market;
  std::optional<std::string> market_record;  // calibration output to read the market from
  double r = 0.05;
  InitialConditions init{};
  double horizon = 1.0;
  std::size_t steps = 2142;
  PolicyConfig policy;
  std::vector<double> etas{1.0};
  std::vector<double> eta_inv{1.0};  // 1/eta as written (inf for eta = 0)
  TrainingSchedule schedule;
  TrainingConfig training;
  EvaluationConfig evaluation;
  ProfileConfig profile;
  std::optional<CalibrationInputs> calibration;
  std::uint64_t seed = 0;
  std::filesystem::path output = "out";

  /// Market scenario; loads `market_record` if the parameters came from a
  /// calibration run. Throws ConfigError if neither is available.
  Scenario scenario() const;
  Architecture architecture() const;
  std::filesystem::path resolve(const std::string& path) const;
};

/// Parses and validates. Unknown keys anywhere are rejected. Relative paths
/// are resolved against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the effective configuration (output directory excluded).
nlohmann::json to_json(const ExperimentConfig& config);

/// 16 hex digits identifying the effective configuration.
std::string config_hash(const ExperimentConfig& config);

/// Market parameters written by `calibrate`.
MarketParams read_market_record(const std::filesystem::path& path);

/// Throws ConfigError unless `name` is analytic, myopic, ann or constant:<w>.
void check_policy_name(const std::string& name, const std::string& path);

/// "a:b:n" (n equispaced points, both ends included) or "v1,v2,...".
/// Throws std::invalid_argument; config and flag parsing rewrap it as ConfigError.
std::vector<double> parse_grid_spec(const std::string& text);

}  // namespace annfolio::app
