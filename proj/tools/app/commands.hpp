#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace annfolio::app {

/// Flags shared by every subcommand; they override the config file.
struct GlobalOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  bool verbose = false;
};

struct TrainFlags {
  bool resume = false;
  bool timing = false;  // fill the ms column (makes logs run-dependent)
  std::optional<std::size_t> checkpoint_every;
};

struct EvalFlags {
  std::vector<std::string> policies;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> wealth_paths;
  std::optional<std::size_t> path_dump;
};

struct ProfileFlags {
  std::vector<std::string> policies;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::string> t_grid;
  std::optional<std::string> y_grid;
};

/// Loads the config named in `global` and applies command-line overrides.
ExperimentConfig effective_config(const GlobalOptions& global);

// Each returns the process exit code; errors propagate as exceptions.
int run_calibrate(const GlobalOptions& global);
int run_train(const GlobalOptions& global, const TrainFlags& flags);
int run_eval(const GlobalOptions& global, const EvalFlags& flags);
int run_profile(const GlobalOptions& global, const ProfileFlags& flags);

}  // namespace annfolio::app
