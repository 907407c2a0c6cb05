#include "annfolio/reports.hpp"

#include <array>
#include <ostream>

namespace annfolio {

namespace {

// gnuplot selects rows of one series by a string column.
std::string select_rows(std::string_view column, std::string_view value, std::string_view x, std::string_view y) {
  return std::string("(") + std::string(x) + "):(strcol(" + std::string(column) + ") eq '" + std::string(value) +
         "' ? " + std::string(y) + " : NaN)";
}

}  // namespace

void write_training_log(std::ostream& out, std::span<const TrainingRecord> log,
                        const std::optional<Provenance>& provenance, bool with_timing) {
  constexpr std::array<std::string_view, 6> header{"phase", "step", "J", "grad_norm", "floor_events", "ms"};
  CsvWriter csv(out, header, provenance);
  for (const TrainingRecord& r : log) {
    csv.field(r.phase).field(r.step).field(r.J).field(r.grad_norm).field(r.floor_events);
    if (with_timing) {
      csv.field(r.ms);
    } else {
      csv.field(std::string_view{});
    }
    csv.end_row();
  }
}

std::string training_log_plot(std::string_view csv_name) {
  const std::array<PlotSeries, 2> series{{
      {"2:3", "J", "lines", ""},
      {"2:4", "gradient norm", "lines axes x1y2", ""},
  }};
  return gnuplot_script(csv_name, "Training progress", "step", "J", series, "set y2label 'grad_norm'\nset y2tics");
}

void write_eval_table(std::ostream& out, std::span<const EvalRow> rows, const std::optional<Provenance>& provenance) {
  constexpr std::array<std::string_view, 6> header{"policy", "eta_inv", "mean", "stderr", "n_rep", "seed"};
  CsvWriter csv(out, header, provenance);
  for (const EvalRow& row : rows) {
    csv.field(row.policy)
        .field(row.eta_inv)
        .field(row.report.mean)
        .field(row.report.std_error)
        .field(row.report.n_rep)
        .field(row.report.seed);
    csv.end_row();
  }
}

std::string eval_table_plot(std::string_view csv_name, std::span<const std::string> policies) {
  std::vector<PlotSeries> series;
  for (const std::string& p : policies) {
    series.push_back({select_rows("1", p, "$2", "$3") + ":4", p, "yerrorlines", ""});
  }
  return gnuplot_script(csv_name, "Mean terminal utility", "1/eta", "mean utility", series,
                        "set key left top");
}

void write_profile(std::ostream& out, std::span<const ProfilePoint> points,
                   const std::optional<Provenance>& provenance) {
  constexpr std::array<std::string_view, 3> header{"t", "y", "pi"};
  CsvWriter csv(out, header, provenance);
  for (const ProfilePoint& p : points) {
    csv.field(p.t).field(p.y).field(p.pi);
    csv.end_row();
  }
}

std::string profile_plot(std::string_view csv_name, std::span<const double> t_values) {
  std::vector<PlotSeries> series;
  for (double t : t_values) {
    const std::string tv = format_double(t);
    series.push_back({"($1 == " + tv + " ? $2 : NaN):3", "t = " + tv, "linespoints", ""});
  }
  return gnuplot_script(csv_name, "Stock weight vs squared volatility", "y", "pi", series);
}

void write_wealth(std::ostream& out, std::span<const WealthTrajectories> trajectories, const TimeGrid& grid,
                  const std::optional<Provenance>& provenance) {
  constexpr std::array<std::string_view, 5> header{"policy", "path", "step", "t", "W"};
  CsvWriter csv(out, header, provenance);
  for (const WealthTrajectories& traj : trajectories) {
    for (std::size_t b = 0; b < traj.paths.size(); ++b) {
      for (std::size_t k = 0; k < traj.paths[b].size(); ++k) {
        csv.field(traj.policy).field(b).field(k).field(grid.t(k)).field(traj.paths[b][k]);
        csv.end_row();
      }
    }
  }
}

std::string wealth_plot(std::string_view csv_name, std::span<const WealthTrajectories> trajectories) {
  std::vector<PlotSeries> series;
  for (const WealthTrajectories& traj : trajectories) {
    for (std::size_t b = 0; b < traj.paths.size(); ++b) {
      const std::string keep = "(strcol(1) eq '" + traj.policy + "' && $2 == " + std::to_string(b) + " ? $5 : NaN)";
      series.push_back({"4:" + keep, b == 0 ? traj.policy : "", "lines lt " + std::to_string(series.size() / traj.paths.size() + 1), ""});
    }
  }
  return gnuplot_script(csv_name, "Simulated wealth", "t", "W", series, "set datafile missing NaN");
}

void write_path_dump(std::ostream& out, std::span<const std::vector<PathPoint>> paths,
                     const std::optional<Provenance>& provenance) {
  constexpr std::array<std::string_view, 8> header{"path", "step", "t", "S", "Y", "P", "W", "pi"};
  CsvWriter csv(out, header, provenance);
  for (std::size_t b = 0; b < paths.size(); ++b) {
    for (std::size_t k = 0; k < paths[b].size(); ++k) {
      const PathPoint& p = paths[b][k];
      csv.field(b).field(k).field(p.t).field(p.S).field(p.Y).field(p.P).field(p.W).field(p.pi);
      csv.end_row();
    }
  }
}

std::string path_dump_plot(std::string_view csv_name, std::size_t n_paths) {
  std::vector<PlotSeries> series;
  for (std::size_t b = 0; b < n_paths; ++b) {
    series.push_back({"3:($1 == " + std::to_string(b) + " ? $5 : NaN)", "path " + std::to_string(b), "lines", ""});
  }
  return gnuplot_script(csv_name, "Simulated squared volatility", "t", "Y", series);
}

}  // namespace annfolio
