#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "annfolio/evaluation.hpp"
#include "annfolio/export.hpp"
#include "annfolio/market.hpp"
#include "annfolio/trainer.hpp"

namespace annfolio {

// CSV writers for every table the tool emits, plus a matching gnuplot
// script for each. All bodies are pure functions of their inputs.

/// phase,step,J,grad_norm,floor_events,ms. The ms column is left empty unless
/// `with_timing`, so logs of identical runs compare equal byte for byte.
void write_training_log(std::ostream& out, std::span<const TrainingRecord> log,
                        const std::optional<Provenance>& provenance, bool with_timing = false);
std::string training_log_plot(std::string_view csv_name);

struct EvalRow {
  std::string policy;
  double eta_inv = 1.0;
  EvalReport report;
};

/// policy,eta_inv,mean,stderr,n_rep,seed
void write_eval_table(std::ostream& out, std::span<const EvalRow> rows, const std::optional<Provenance>& provenance);
std::string eval_table_plot(std::string_view csv_name, std::span<const std::string> policies);

/// t,y,pi
void write_profile(std::ostream& out, std::span<const ProfilePoint> points,
                   const std::optional<Provenance>& provenance);
std::string profile_plot(std::string_view csv_name, std::span<const double> t_values);

/// policy,path,step,t,W
void write_wealth(std::ostream& out, std::span<const WealthTrajectories> trajectories, const TimeGrid& grid,
                  const std::optional<Provenance>& provenance);
std::string wealth_plot(std::string_view csv_name, std::span<const WealthTrajectories> trajectories);

/// path,step,t,S,Y,P,W,pi
void write_path_dump(std::ostream& out, std::span<const std::vector<PathPoint>> paths,
                     const std::optional<Provenance>& provenance);
std::string path_dump_plot(std::string_view csv_name, std::size_t n_paths);

}  // namespace annfolio
