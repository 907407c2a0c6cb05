// annfolio command-line front end.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "app/commands.hpp"

namespace app = annfolio::app;

int main(int argc, char** argv) {
  CLI::App cli{"Train and evaluate neural feedback portfolio policies"};
  cli.require_subcommand(1);
  cli.fallthrough();

  app::GlobalOptions global;
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  cli.add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = cli.add_option("--seed", seed, "Master seed (overrides the config)");
  auto* out_opt = cli.add_option("--out", out, "Output directory (overrides the config)");
  cli.add_flag("--verbose,-v", global.verbose, "Progress on stderr");

  auto* calibrate = cli.add_subcommand("calibrate", "Estimate GBM/Heston parameters from price and VIX CSVs");

  app::TrainFlags train_flags;
  std::size_t checkpoint_every = 0;
  auto* train = cli.add_subcommand("train", "Train one policy per risk aversion in the config");
  train->add_flag("--resume", train_flags.resume, "Continue from the latest periodic checkpoint");
  train->add_flag("--timing", train_flags.timing, "Record per-step wall time in the log's ms column");
  auto* every_opt = train->add_option("--checkpoint-every", checkpoint_every, "Periodic checkpoint interval (steps)");

  app::EvalFlags eval_flags;
  std::string eval_ckpt;
  std::size_t reps = 0, wealth_paths = 0, path_dump = 0;
  auto* eval = cli.add_subcommand("eval", "Monte Carlo expected utility of policies");
  eval->add_option("--policy", eval_flags.policies, "analytic, myopic, ann or constant:<w> (repeatable)")
      ->delimiter(',');
  auto* eval_ckpt_opt = eval->add_option("--checkpoint", eval_ckpt, "Checkpoint for the ann policy");
  auto* reps_opt = eval->add_option("--reps", reps, "Monte Carlo replications");
  auto* wealth_opt = eval->add_option("--wealth-paths", wealth_paths, "Also export this many wealth paths");
  auto* dump_opt = eval->add_option("--path-dump", path_dump, "Also dump this many full market paths");

  app::ProfileFlags profile_flags;
  std::string profile_ckpt, t_grid, y_grid;
  auto* profile = cli.add_subcommand("profile", "Tabulate policy weights over (t, y) grids");
  profile->add_option("--policy", profile_flags.policies, "analytic, myopic, ann or constant:<w>")->delimiter(',');
  auto* profile_ckpt_opt = profile->add_option("--checkpoint", profile_ckpt, "Checkpoint of an ann policy");
  auto* t_opt = profile->add_option("--t-grid", t_grid, "a:b:n or comma list of times");
  auto* y_opt = profile->add_option("--y-grid", y_grid, "a:b:n or comma list of squared volatilities");

  CLI11_PARSE(cli, argc, argv);

  global.config = config;
  if (*seed_opt) global.seed = seed;
  if (*out_opt) global.out = out;
  if (*every_opt) train_flags.checkpoint_every = checkpoint_every;
  if (*eval_ckpt_opt) eval_flags.checkpoint = eval_ckpt;
  if (*reps_opt) eval_flags.reps = reps;
  if (*wealth_opt) eval_flags.wealth_paths = wealth_paths;
  if (*dump_opt) eval_flags.path_dump = path_dump;
  if (*profile_ckpt_opt) profile_flags.checkpoint = profile_ckpt;
  if (*t_opt) profile_flags.t_grid = t_grid;
  if (*y_opt) profile_flags.y_grid = y_grid;

  try {
    if (calibrate->parsed()) return app::run_calibrate(global);
    if (train->parsed()) return app::run_train(global, train_flags);
    if (eval->parsed()) return app::run_eval(global, eval_flags);
    if (profile->parsed()) return app::run_profile(global, profile_flags);
  } catch (const app::ConfigError& e) {
    std::cerr << "annfolio: config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "annfolio: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
