#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include <annfolio/baselines.hpp>
#include <annfolio/calibration.hpp>
#include <annfolio/checkpoint.hpp>
#include <annfolio/evaluation.hpp>
#include <annfolio/reports.hpp>
#include <annfolio/trainer.hpp>

#include "output.hpp"

namespace annfolio::app {

namespace {

class Console {
 public:
  explicit Console(bool verbose) : verbose_(verbose) {}
  template <class... Args>
  void info(const Args&... args) const {
    if (!verbose_) return;
    std::cerr << "[annfolio] ";
    (std::cerr << ... << args);
    std::cerr << '\n';
  }
  template <class... Args>
  void notice(const Args&... args) const {
    std::cerr << "[annfolio] ";
    (std::cerr << ... << args);
    std::cerr << '\n';
  }

 private:
  bool verbose_;
};

Provenance provenance_of(const ExperimentConfig& cfg) { return {config_hash(cfg), std::to_string(cfg.seed)}; }

/// CSV, its gnuplot script and its metadata sidecar.
void emit_csv(const std::filesystem::path& csv_path, const std::string& body, const std::string& plot,
              const RunInfo& run) {
  write_file_atomic(csv_path, body);
  std::filesystem::path gp = csv_path;
  gp += ".gp";
  write_file_atomic(gp, provenance_comment(run.provenance) + "\n" + plot);
  write_meta(csv_path, run);
}

std::string file_safe(std::string name) {
  std::replace(name.begin(), name.end(), ':', '_');
  return name;
}

// ---------------------------------------------------------------- calibrate

nlohmann::json gbm_record(const GbmEstimate& est, double r) {
  return {{"model", "gbm"},
          {"params", {{"r", r}, {"mu", est.mu}, {"sigma", est.sigma}}},
          {"observations", est.observations}};
}

nlohmann::json heston_record(const HestonEstimate& est, double r) {
  return {{"model", "heston"},
          {"params",
           {{"r", r}, {"mu", est.mu}, {"kappa", est.kappa}, {"theta", est.theta}, {"sigma_y", est.sigma_y},
            {"rho", est.rho}}},
          {"feller", est.feller},
          {"observations", est.observations},
          {"skipped_nonpositive_variance", est.skipped}};
}

std::string key_value_report(const nlohmann::json& record, const Provenance& prov) {
  std::ostringstream s;
  s << provenance_comment(prov) << '\n';
  s << "model = " << record["model"].get<std::string>() << '\n';
  for (const auto& [key, value] : record["params"].items()) s << key << " = " << format_double(value.get<double>()) << '\n';
  for (const auto& [key, value] : record.items()) {
    if (key == "model" || key == "params" || key == "config_hash" || key == "seed") continue;
    s << key << " = " << value.dump() << '\n';
  }
  return s.str();
}

}  // namespace

ExperimentConfig effective_config(const GlobalOptions& global) {
  ExperimentConfig cfg = load_config(global.config);
  if (global.seed) cfg.seed = *global.seed;
  if (global.out) cfg.output = *global.out;
  return cfg;
}

int run_calibrate(const GlobalOptions& global) {
  const ExperimentConfig cfg = effective_config(global);
  const Console console(global.verbose);
  if (!cfg.calibration) throw ConfigError("calibration: section is required for 'calibrate'");
  const CalibrationInputs& in = *cfg.calibration;
  RunInfo run{"calibrate", provenance_of(cfg)};

  // Everything is read and estimated before the first file is written.
  const PriceSeries prices = load_price_csv(cfg.resolve(in.prices));
  console.info("read ", prices.size(), " prices from ", in.prices);
  std::optional<VarianceSeries> variances;
  if (in.vix) {
    variances = load_vix_csv(cfg.resolve(*in.vix));
    console.info("read ", variances->size(), " VIX closes from ", *in.vix);
  }

  std::vector<std::pair<std::string, nlohmann::json>> records;
  for (const std::string& model : in.models) {
    nlohmann::json rec;
    if (model == "gbm") {
      rec = gbm_record(calibrate_gbm(prices, in.dt), cfg.r);
    } else {
      const HestonEstimate est = calibrate_heston(prices, *variances, in.dt);
      if (!est.feller) console.notice("warning: calibrated Heston parameters violate the Feller condition");
      rec = heston_record(est, cfg.r);
    }
    rec["config_hash"] = run.provenance.config_hash;
    rec["seed"] = run.provenance.seeds;
    rec["dt"] = in.dt;
    records.emplace_back(model, rec);
  }

  const OutputLayout layout{cfg.output};
  const auto dir = layout.ensure(layout.calibration());
  for (const auto& [model, rec] : records) {
    const auto json_path = dir / (model + ".json");
    write_file_atomic(json_path, rec.dump(2) + "\n");
    write_meta(json_path, run);
    const auto txt_path = dir / (model + ".txt");
    write_file_atomic(txt_path, key_value_report(rec, run.provenance));
    write_meta(txt_path, run);
    console.info("wrote ", json_path.string());
    std::cout << key_value_report(rec, run.provenance);
  }
  return 0;
}

// -------------------------------------------------------------------- train

namespace {

std::string render_log(const std::vector<std::string>& prior_rows, std::span<const TrainingRecord> log,
                       const Provenance& prov, bool timing) {
  std::ostringstream fresh;
  write_training_log(fresh, log, prov, timing);
  if (prior_rows.empty()) return fresh.str();
  // Splice rows recovered from the interrupted run in front of the new ones.
  std::istringstream lines(fresh.str());
  std::ostringstream out;
  std::string line;
  std::getline(lines, line);
  out << line << '\n';  // provenance
  std::getline(lines, line);
  out << line << '\n';  // header
  for (const auto& row : prior_rows) out << row << '\n';
  while (std::getline(lines, line)) out << line << '\n';
  return out.str();
}

/// Data rows of an existing training log, in order.
std::vector<std::string> read_log_rows(const std::filesystem::path& path, std::size_t count) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot resume: training log " + path.string() + " is missing");
  std::vector<std::string> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line) && rows.size() < count) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    rows.push_back(line);
  }
  if (rows.size() != count) throw std::runtime_error("cannot resume: training log " + path.string() + " is short");
  return rows;
}

std::optional<std::filesystem::path> latest_periodic(const std::filesystem::path& dir, const std::string& label) {
  std::optional<std::filesystem::path> best;
  std::uint64_t best_step = 0;
  if (!std::filesystem::exists(dir)) return best;
  const std::string prefix = label + "_step";
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind(prefix, 0) != 0 || entry.path().extension() != ".ckpt") continue;
    try {
      const std::uint64_t step = parse_u64(name.substr(prefix.size(), name.size() - prefix.size() - 5), "step");
      if (!best || step > best_step) {
        best = entry.path();
        best_step = step;
      }
    } catch (const std::invalid_argument&) {
    }
  }
  return best;
}

Checkpoint make_checkpoint(const TrainerState& state, const TrainingSchedule& schedule, const ExperimentConfig& cfg,
                           const Scenario& scenario, double eta, const Provenance& prov) {
  Checkpoint c{state.theta};
  c.seed = cfg.seed;
  c.eta = eta;
  c.horizon = scenario.grid.horizon();
  c.model = std::string(to_string(scenario.params.kind()));
  if (scenario.params.is_gbm()) c.input_y = scenario.params.long_run_variance();
  c.config_hash = prov.config_hash;
  c.steps_done = state.steps_done;
  if (state.steps_done < total_steps(schedule)) {
    const ScheduleCursor cur = locate_step(schedule, state.steps_done);
    c.phase = cur.phase;
    c.step_in_phase = cur.step_in_phase;
  } else {
    c.phase = schedule.size();
    c.step_in_phase = 0;
  }
  c.adam = state.adam;
  return c;
}

std::string checkpoint_text(const Checkpoint& c) {
  std::ostringstream s;
  write_checkpoint(s, c);
  return s.str();
}

}  // namespace

int run_train(const GlobalOptions& global, const TrainFlags& flags) {
  ExperimentConfig cfg = effective_config(global);
  if (flags.checkpoint_every) cfg.training.checkpoint_every = *flags.checkpoint_every;
  const Console console(global.verbose);
  if (cfg.schedule.empty()) throw ConfigError("schedule: at least one phase is required for 'train'");
  validate_schedule(cfg.schedule);
  const Scenario scenario = cfg.scenario();
  const Architecture arch = cfg.architecture();
  const Provenance prov = provenance_of(cfg);
  const RunInfo run{"train", prov};

  const OutputLayout layout{cfg.output};
  std::filesystem::create_directories(layout.root);
  const DirectoryLock lock(layout.root);
  const auto ckpt_dir = layout.ensure(layout.checkpoints());
  const auto log_dir = layout.ensure(layout.logs());

  for (double eta : cfg.etas) {
    const std::string label = eta_label(eta);
    const auto log_path = log_dir / ("train_" + label + ".csv");

    std::optional<TrainerState> resume;
    std::vector<std::string> prior_rows;
    if (flags.resume) {
      if (const auto latest = latest_periodic(ckpt_dir, label)) {
        const Checkpoint c = load_checkpoint(*latest);
        if (c.config_hash != prov.config_hash || c.seed != cfg.seed || c.eta != eta) {
          throw std::runtime_error("cannot resume from " + latest->string() + ": it belongs to a different run");
        }
        if (!c.adam) throw std::runtime_error("cannot resume from " + latest->string() + ": no optimizer state");
        resume = TrainerState{c.theta, *c.adam, c.steps_done};
        prior_rows = read_log_rows(log_path, c.steps_done);
        console.info(label, ": resuming at step ", c.steps_done, " from ", latest->string());
      }
    }

    TrainOptions options;
    options.seed = cfg.seed;
    options.sigma_init = cfg.policy.sigma_init;
    options.pool = cfg.training.pool;
    std::vector<TrainingRecord> so_far;
    const std::size_t every = cfg.training.checkpoint_every;
    const std::size_t n_steps = total_steps(cfg.schedule);
    options.on_step = [&](const TrainerState& state, const TrainingRecord& rec) {
      so_far.push_back(rec);
      if (state.steps_done % 50 == 0 || state.steps_done == n_steps) {
        console.info(label, " step ", state.steps_done, "/", n_steps, " J=", format_double(rec.J));
      }
      if (every > 0 && state.steps_done % every == 0 && state.steps_done < n_steps) {
        const auto path = ckpt_dir / (label + "_step" + std::to_string(state.steps_done) + ".ckpt");
        write_file_atomic(path, checkpoint_text(make_checkpoint(state, cfg.schedule, cfg, scenario, eta, prov)));
        write_file_atomic(log_path, render_log(prior_rows, so_far, prov, flags.timing));
      }
    };

    const TrainResult result = train(cfg.schedule, arch, scenario, UtilitySpec{eta}, options, resume);

    const auto final_path = ckpt_dir / (label + ".ckpt");
    write_file_atomic(final_path, checkpoint_text(make_checkpoint(result.state, cfg.schedule, cfg, scenario, eta, prov)));
    write_meta(final_path, run);
    emit_csv(log_path, render_log(prior_rows, result.log, prov, flags.timing), training_log_plot(log_path.filename().string()),
             run);
    if (!result.validation.empty()) {
      std::ostringstream v;
      constexpr std::array<std::string_view, 2> header{"step", "J"};
      CsvWriter csv(v, header, prov);
      for (const ValidationRecord& r : result.validation) {
        csv.field(r.step).field(r.J);
        csv.end_row();
      }
      const auto val_path = log_dir / ("validation_" + label + ".csv");
      const std::array<PlotSeries, 1> series{{{"1:2", "held-out J", "linespoints", ""}}};
      emit_csv(val_path, v.str(), gnuplot_script(val_path.filename().string(), "Held-out utility", "step", "J", series),
               run);
    }
    const double final_j = result.log.empty() ? std::nan("") : result.log.back().J;
    std::cout << label << ": " << result.state.steps_done << " steps, final minibatch J = " << format_double(final_j)
              << ", checkpoint " << final_path.string() << '\n';
  }
  return 0;
}

// --------------------------------------------------------------------- eval

namespace {

struct PolicySource {
  const ExperimentConfig& cfg;
  const Scenario& scenario;
  std::optional<std::filesystem::path> checkpoint;
  const Console& console;

  /// Policy `name` at risk aversion `eta`, or nullopt if it does not apply.
  std::optional<Policy> make(const std::string& name, double eta) const {
    if (name == "analytic") {
      if (scenario.params.is_gbm()) {
        if (!(eta > 0.0)) {
          console.notice("skipping analytic at eta = 0 (unbounded Merton demand)");
          return std::nullopt;
        }
        return Policy::analytic_gbm(eta);
      }
      if (eta != 1.0) {
        console.notice("skipping analytic at eta = ", format_double(eta), ": the Heston closed form needs eta = 1");
        return std::nullopt;
      }
      return Policy::myopic_heston();
    }
    if (name == "myopic") return Policy::myopic_heston();
    if (name.rfind("constant:", 0) == 0) return Policy::constant(parse_double(name.substr(9), "constant weight"));
    if (name == "ann") {
      const OutputLayout layout{cfg.output};
      const auto path = checkpoint ? *checkpoint : layout.checkpoints() / (eta_label(eta) + ".ckpt");
      if (!std::filesystem::exists(path)) throw std::runtime_error("checkpoint " + path.string() + " does not exist");
      const Checkpoint c = load_checkpoint(path);
      if (c.eta != eta) {
        if (checkpoint) {
          console.notice("skipping ann at eta = ", format_double(eta), ": ", path.string(), " was trained at eta = ",
                         format_double(c.eta));
          return std::nullopt;
        }
        throw std::runtime_error(path.string() + " was trained at eta = " + format_double(c.eta));
      }
      if (c.model != to_string(scenario.params.kind())) {
        throw std::runtime_error(path.string() + " was trained on a " + c.model + " market");
      }
      return Policy::ann(c.theta);
    }
    throw ConfigError("unknown policy '" + name + "'");
  }
};

std::string label_of(const Policy& policy) {
  // Tables call the closed-form baseline of either model "analytic".
  if (std::holds_alternative<MyopicHestonPolicy>(policy.variant())) return "myopic";
  return policy.name();
}

}  // namespace

int run_eval(const GlobalOptions& global, const EvalFlags& flags) {
  ExperimentConfig cfg = effective_config(global);
  if (!flags.policies.empty()) cfg.evaluation.policies = flags.policies;
  if (flags.reps) cfg.evaluation.reps = *flags.reps;
  if (flags.wealth_paths) cfg.evaluation.wealth_paths = *flags.wealth_paths;
  if (flags.path_dump) cfg.evaluation.path_dump = *flags.path_dump;
  for (const auto& name : cfg.evaluation.policies) check_policy_name(name, "--policy");
  if (cfg.evaluation.reps < 2) throw ConfigError("--reps: must be >= 2");
  const Console console(global.verbose);
  const Scenario scenario = cfg.scenario();
  const Provenance prov = provenance_of(cfg);
  const RunInfo run{"eval", prov};
  const PolicySource source{cfg, scenario, flags.checkpoint, console};

  // Resolve every policy before simulating anything.
  std::vector<std::pair<std::size_t, Policy>> jobs;
  for (std::size_t i = 0; i < cfg.etas.size(); ++i) {
    for (const std::string& name : cfg.evaluation.policies) {
      if (auto p = source.make(name, cfg.etas[i])) jobs.emplace_back(i, std::move(*p));
    }
  }
  if (jobs.empty()) throw std::runtime_error("no (policy, eta) combination applies to this market");

  std::vector<EvalRow> rows;
  for (const auto& [i, policy] : jobs) {
    const double eta = cfg.etas[i];
    const EvalReport report = evaluate_policy(policy, scenario, UtilitySpec{eta}, cfg.evaluation.reps, cfg.seed);
    console.info(label_of(policy), " eta=", format_double(eta), " mean=", format_double(report.mean),
                 " se=", format_double(report.std_error));
    if (report.floor_events > 0) {
      console.notice("warning: ", label_of(policy), " at eta = ", format_double(eta), " hit the wealth floor ",
                     report.floor_events, " times");
    }
    rows.push_back({label_of(policy), cfg.eta_inv[i], report});
  }

  const OutputLayout layout{cfg.output};
  const auto dir = layout.ensure(layout.reports());
  std::ostringstream table;
  write_eval_table(table, rows, prov);
  std::vector<std::string> names;
  for (const auto& row : rows) {
    if (std::find(names.begin(), names.end(), row.policy) == names.end()) names.push_back(row.policy);
  }
  const auto eval_path = dir / "eval.csv";
  emit_csv(eval_path, table.str(), eval_table_plot("eval.csv", names), run);
  std::cout << table.str();

  // Figures use the first eta that has at least one policy.
  const std::size_t fig_eta = jobs.front().first;
  std::vector<Policy> fig_policies;
  for (const auto& [i, policy] : jobs) {
    if (i == fig_eta) fig_policies.push_back(policy);
  }
  if (cfg.evaluation.wealth_paths > 0) {
    const auto traj = wealth_paths_export(fig_policies, scenario, cfg.evaluation.wealth_paths, cfg.seed);
    std::vector<WealthTrajectories> labelled = traj;
    for (std::size_t k = 0; k < labelled.size(); ++k) labelled[k].policy = label_of(fig_policies[k]);
    std::ostringstream w;
    write_wealth(w, labelled, scenario.grid, prov);
    emit_csv(dir / "wealth.csv", w.str(), wealth_plot("wealth.csv", labelled), run);
  }
  if (cfg.evaluation.path_dump > 0) {
    const SimulationResult sim =
        simulate_batch(scenario, fig_policies.front().bind(scenario), cfg.evaluation.path_dump, cfg.seed, true);
    std::ostringstream p;
    write_path_dump(p, sim.paths, prov);
    emit_csv(dir / "paths.csv", p.str(), path_dump_plot("paths.csv", sim.paths.size()), run);
  }
  return 0;
}

// ------------------------------------------------------------------ profile

int run_profile(const GlobalOptions& global, const ProfileFlags& flags) {
  ExperimentConfig cfg = effective_config(global);
  try {
    if (flags.t_grid) cfg.profile.t_grid = parse_grid_spec(*flags.t_grid);
    if (flags.y_grid) cfg.profile.y_grid = parse_grid_spec(*flags.y_grid);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  for (double t : cfg.profile.t_grid) {
    if (t < 0.0 || t > cfg.horizon) throw ConfigError("t-grid: times must lie in [0, grid.horizon]");
  }
  for (double y : cfg.profile.y_grid) {
    if (y < 0.0) throw ConfigError("y-grid: squared volatilities must be >= 0");
  }
  for (const auto& name : flags.policies) check_policy_name(name, "--policy");
  std::vector<std::string> names = flags.policies;
  if (names.empty()) names = flags.checkpoint ? std::vector<std::string>{"ann"} : cfg.evaluation.policies;
  cfg.evaluation.policies = names;

  const Console console(global.verbose);
  const Scenario scenario = cfg.scenario();
  const Provenance prov = provenance_of(cfg);
  const RunInfo run{"profile", prov};
  const PolicySource source{cfg, scenario, flags.checkpoint, console};
  const double y_ref = scenario.params.long_run_variance();
  const std::vector<double> y_grid = cfg.profile.y_grid.empty() ? std::vector<double>{y_ref} : cfg.profile.y_grid;

  struct Item {
    std::size_t eta_index;
    Policy policy;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < cfg.etas.size(); ++i) {
    for (const std::string& name : names) {
      if (auto p = source.make(name, cfg.etas[i])) items.push_back({i, std::move(*p)});
    }
  }
  if (items.empty()) throw std::runtime_error("no (policy, eta) combination applies to this market");

  const OutputLayout layout{cfg.output};
  const auto dir = layout.ensure(layout.profiles());

  std::string band_extra;
  if (scenario.params.is_heston()) {
    const VarianceBand band = average_pathwise_range(scenario, 1000, cfg.seed);
    band_extra = "set arrow from " + format_double(band.lower) + ", graph 0 to " + format_double(band.lower) +
                 ", graph 1 nohead dt 2\nset arrow from " + format_double(band.upper) + ", graph 0 to " +
                 format_double(band.upper) + ", graph 1 nohead dt 2\n";
    console.info("average pathwise 95% range of Y: [", format_double(band.lower), ", ", format_double(band.upper),
                 "]");
  }

  std::ostringstream summary;
  constexpr std::array<std::string_view, 4> header{"policy", "eta_inv", "y", "avg_pi"};
  CsvWriter sum_csv(summary, header, prov);
  std::vector<std::string> sum_names;
  for (const Item& item : items) {
    const double eta = cfg.etas[item.eta_index];
    const std::string name = label_of(item.policy);
    const auto points = weight_profile(item.policy, scenario.params, cfg.horizon, cfg.profile.t_grid, y_grid);
    std::ostringstream body;
    write_profile(body, points, prov);
    const std::string file = file_safe(name) + "_" + eta_label(eta) + ".csv";
    std::string plot = profile_plot(file, cfg.profile.t_grid);
    if (!band_extra.empty()) plot = band_extra + plot;
    emit_csv(dir / file, body.str(), plot, run);

    const double avg =
        time_averaged_weight(item.policy, scenario.params, cfg.horizon, y_ref, cfg.profile.average_points);
    sum_csv.field(name).field(cfg.eta_inv[item.eta_index]).field(y_ref).field(avg);
    sum_csv.end_row();
    if (std::find(sum_names.begin(), sum_names.end(), name) == sum_names.end()) sum_names.push_back(name);
    std::cout << name << " " << eta_label(eta) << ": time-averaged weight " << format_double(avg) << '\n';
  }
  std::vector<PlotSeries> series;
  for (const auto& n : sum_names) {
    series.push_back({"($2):(strcol(1) eq '" + n + "' ? $4 : NaN)", n, "linespoints", ""});
  }
  emit_csv(dir / "average_weight.csv", summary.str(),
           gnuplot_script("average_weight.csv", "Time-averaged stock weight", "1/eta", "pi", series), run);
  return 0;
}

}  // namespace annfolio::app
