#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <annfolio/evaluation.hpp>
#include <annfolio/export.hpp>

namespace annfolio::app {

using nlohmann::json;

namespace {

/// Reads keys of one JSON object, remembering which were used so that
/// finish() can reject the rest.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "config must be a JSON object" : "must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  const json& at(const std::string& key) {
    if (!has(key)) fail_key(key, "is required");
    return node_.at(key);
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) fail_key(key, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail_key(key, "must be finite");
    return x;
  }

  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  double positive(const std::string& key) {
    const double x = number(key);
    if (!(x > 0.0)) fail_key(key, "must be > 0");
    return x;
  }

  double positive_or(const std::string& key, double fallback) { return has(key) ? positive(key) : fallback; }

  std::uint64_t count(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail_key(key, "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::uint64_t count_or(const std::string& key, std::uint64_t fallback) { return has(key) ? count(key) : fallback; }

  std::string text(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) fail_key(key, "must be a string");
    return v.get<std::string>();
  }

  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!seen_.contains(item.key())) fail_key(item.key(), "is not a recognised key");
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(path_.empty() ? what : path_ + ": " + what);
  }
  [[noreturn]] void fail_key(const std::string& key, const std::string& what) const {
    throw ConfigError(child_path(key) + ": " + what);
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> number_list(const json& v, const std::string& path) {
  if (v.is_string()) {
    try {
      return parse_grid_spec(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  if (!v.is_array() || v.empty()) throw ConfigError(path + ": must be a non-empty array of numbers");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number() || !std::isfinite(x.get<double>())) throw ConfigError(path + ": entries must be finite numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

void parse_market(Section& top, ExperimentConfig& cfg) {
  if (!top.has("market")) return;
  Section m(top.at("market"), "market");
  const std::string model = m.text("model");
  if (model == "gbm") {
    cfg.model = ModelKind::gbm;
  } else if (model == "heston") {
    cfg.model = ModelKind::heston;
  } else {
    m.fail_key("model", "must be \"gbm\" or \"heston\"");
  }
  cfg.r = m.number_or("r", 0.05);

  if (m.has("from_calibration")) {
    cfg.market_record = m.text("from_calibration");
    for (const char* key : {"mu", "sigma", "kappa", "theta", "sigma_y", "rho"}) {
      if (m.has(key)) m.fail_key(key, "cannot be combined with from_calibration");
    }
  } else if (cfg.model == ModelKind::gbm) {
    cfg.market = MarketParams(GbmParams{cfg.r, m.number("mu"), m.positive("sigma")});
    for (const char* key : {"kappa", "theta", "sigma_y", "rho"}) {
      if (m.has(key)) m.fail_key(key, "is a Heston parameter");
    }
  } else {
    const double mu = m.number("mu");
    const double kappa = m.positive("kappa");
    const double theta = m.positive("theta");
    const double sigma_y = m.positive("sigma_y");
    const double rho = m.number("rho");
    if (rho < -1.0 || rho > 1.0) m.fail_key("rho", "must lie in [-1, 1]");
    if (m.has("sigma")) m.fail_key("sigma", "is a GBM parameter");
    cfg.market = MarketParams(HestonParams{cfg.r, mu, kappa, theta, sigma_y, rho});
  }

  cfg.init.s0 = m.positive_or("s0", cfg.init.s0);
  cfg.init.w0 = m.positive_or("w0", cfg.init.w0);
  if (m.has("y0")) {
    if (cfg.model == ModelKind::gbm) m.fail_key("y0", "only applies to Heston (GBM variance is sigma^2)");
    cfg.init.y0 = m.number("y0");
    if (cfg.init.y0 < 0.0) m.fail_key("y0", "must be >= 0");
  }
  m.finish();
}

void parse_grid(Section& top, ExperimentConfig& cfg) {
  if (!top.has("grid")) return;
  Section g(top.at("grid"), "grid");
  cfg.horizon = g.positive_or("horizon", cfg.horizon);
  cfg.steps = g.count_or("steps", cfg.steps);
  if (cfg.steps == 0) g.fail_key("steps", "must be >= 1");
  g.finish();
}

void parse_policy(Section& top, ExperimentConfig& cfg) {
  if (!top.has("policy")) return;
  Section p(top.at("policy"), "policy");
  if (p.has("hidden")) {
    const json& h = p.at("hidden");
    if (!h.is_array() || h.empty()) p.fail_key("hidden", "must be a non-empty array of widths");
    cfg.policy.hidden.clear();
    for (const json& w : h) {
      if (!w.is_number_integer() || w.get<std::int64_t>() < 1) p.fail_key("hidden", "widths must be integers >= 1");
      cfg.policy.hidden.push_back(w.get<std::size_t>());
    }
  }
  if (p.has("sigma_init")) {
    cfg.policy.sigma_init = p.number("sigma_init");
    if (cfg.policy.sigma_init < 0.0) p.fail_key("sigma_init", "must be >= 0");
  }
  cfg.policy.y_scale = p.positive_or("y_scale", cfg.policy.y_scale);
  p.finish();
}

void parse_utility(Section& top, ExperimentConfig& cfg) {
  if (!top.has("utility")) return;
  Section u(top.at("utility"), "utility");
  const bool by_eta = u.has("eta");
  const bool by_inv = u.has("eta_inv");
  if (by_eta == by_inv) u.fail("give exactly one of eta or eta_inv");
  const std::string key = by_eta ? "eta" : "eta_inv";
  const json& v = u.at(key);
  std::vector<double> values = v.is_number() ? std::vector<double>{v.get<double>()} : number_list(v, u.child_path(key));
  cfg.etas.clear();
  cfg.eta_inv.clear();
  for (double x : values) {
    if (by_eta) {
      if (!(x >= 0.0)) u.fail_key(key, "values must be >= 0");
      cfg.etas.push_back(x);
      cfg.eta_inv.push_back(x == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / x);
    } else {
      if (!(x > 0.0)) u.fail_key(key, "values must be > 0");
      cfg.etas.push_back(1.0 / x);
      cfg.eta_inv.push_back(x);
    }
  }
  u.finish();
}

void parse_schedule(Section& top, ExperimentConfig& cfg) {
  if (!top.has("schedule")) return;
  const json& s = top.at("schedule");
  if (!s.is_array() || s.empty()) throw ConfigError("schedule: must be a non-empty array of phases");
  for (std::size_t i = 0; i < s.size(); ++i) {
    Section p(s[i], "schedule[" + std::to_string(i) + "]");
    TrainingPhase phase;
    phase.steps = p.count("steps");
    phase.batch = p.count("batch");
    phase.step_size = p.positive("step_size");
    if (phase.steps == 0) p.fail_key("steps", "must be >= 1");
    if (phase.batch == 0) p.fail_key("batch", "must be >= 1");
    p.finish();
    cfg.schedule.push_back(phase);
  }
}

void parse_training(Section& top, ExperimentConfig& cfg) {
  if (!top.has("training")) return;
  Section t(top.at("training"), "training");
  cfg.training.checkpoint_every = t.count_or("checkpoint_every", 0);
  if (t.has("pool")) {
    Section p(t.at("pool"), "training.pool");
    PoolOptions pool;
    pool.pool_paths = p.count("paths");
    pool.validation_fraction = p.number_or("validation_fraction", pool.validation_fraction);
    pool.validate_every = p.count_or("validate_every", pool.validate_every);
    if (pool.validation_fraction < 0.0 || pool.validation_fraction >= 1.0) {
      p.fail_key("validation_fraction", "must lie in [0, 1)");
    }
    const auto held_out = static_cast<std::size_t>(pool.validation_fraction * static_cast<double>(pool.pool_paths));
    if (pool.pool_paths - held_out < 1) p.fail_key("paths", "leaves no training paths");
    if (pool.validate_every == 0) p.fail_key("validate_every", "must be >= 1");
    p.finish();
    cfg.training.pool = pool;
  }
  t.finish();
}

}  // namespace

void check_policy_name(const std::string& name, const std::string& path) {
  if (name == "analytic" || name == "myopic" || name == "ann") return;
  if (name.rfind("constant:", 0) == 0) {
    try {
      parse_double(std::string_view(name).substr(9), "constant weight");
      return;
    } catch (const std::invalid_argument&) {
    }
  }
  throw ConfigError(path + ": unknown policy '" + name + "' (expected analytic, myopic, ann or constant:<w>)");
}

namespace {

void parse_evaluation(Section& top, ExperimentConfig& cfg) {
  if (!top.has("evaluation")) return;
  Section e(top.at("evaluation"), "evaluation");
  cfg.evaluation.reps = e.count_or("reps", cfg.evaluation.reps);
  if (cfg.evaluation.reps < 2) e.fail_key("reps", "must be >= 2");
  if (e.has("policies")) {
    const json& p = e.at("policies");
    if (!p.is_array() || p.empty()) e.fail_key("policies", "must be a non-empty array of names");
    cfg.evaluation.policies.clear();
    for (const json& name : p) {
      if (!name.is_string()) e.fail_key("policies", "entries must be strings");
      check_policy_name(name.get<std::string>(), e.child_path("policies"));
      cfg.evaluation.policies.push_back(name.get<std::string>());
    }
  }
  cfg.evaluation.wealth_paths = e.count_or("wealth_paths", 0);
  cfg.evaluation.path_dump = e.count_or("path_dump", 0);
  e.finish();
}

void parse_profile(Section& top, ExperimentConfig& cfg) {
  if (!top.has("profile")) return;
  Section p(top.at("profile"), "profile");
  if (p.has("t_grid")) cfg.profile.t_grid = number_list(p.at("t_grid"), p.child_path("t_grid"));
  if (p.has("y_grid")) cfg.profile.y_grid = number_list(p.at("y_grid"), p.child_path("y_grid"));
  cfg.profile.average_points = p.count_or("average_points", cfg.profile.average_points);
  if (cfg.profile.average_points < 2) p.fail_key("average_points", "must be >= 2");
  for (double y : cfg.profile.y_grid) {
    if (y < 0.0) p.fail_key("y_grid", "squared volatilities must be >= 0");
  }
  p.finish();
}

void parse_calibration(Section& top, ExperimentConfig& cfg) {
  if (!top.has("calibration")) return;
  Section c(top.at("calibration"), "calibration");
  CalibrationInputs in;
  in.prices = c.text("prices");
  if (c.has("vix")) in.vix = c.text("vix");
  in.dt = c.positive_or("dt", in.dt);
  if (c.has("models")) {
    const json& m = c.at("models");
    if (!m.is_array() || m.empty()) c.fail_key("models", "must be a non-empty array");
    for (const json& name : m) {
      if (!name.is_string() || (name != "gbm" && name != "heston")) {
        c.fail_key("models", "entries must be \"gbm\" or \"heston\"");
      }
      in.models.push_back(name.get<std::string>());
    }
  } else {
    in.models = in.vix ? std::vector<std::string>{"gbm", "heston"} : std::vector<std::string>{"gbm"};
  }
  for (const auto& name : in.models) {
    if (name == "heston" && !in.vix) c.fail_key("models", "heston calibration needs a vix file");
  }
  c.finish();
  cfg.calibration = in;
}

json number_json(double x) {
  // JSON has no infinity; 1/eta for eta = 0 is spelled as a string.
  if (!std::isfinite(x)) return format_double(x);
  return x;
}

}  // namespace

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  Section top(doc, "");
  if (top.has("seed")) cfg.seed = top.count("seed");
  if (top.has("output")) cfg.output = top.text("output");
  parse_market(top, cfg);
  parse_grid(top, cfg);
  parse_policy(top, cfg);
  parse_utility(top, cfg);
  parse_schedule(top, cfg);
  parse_training(top, cfg);
  parse_evaluation(top, cfg);
  parse_profile(top, cfg);
  parse_calibration(top, cfg);
  top.finish();
  if (cfg.market) {
    try {
      cfg.market->validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("market: ") + e.what());
    }
  }
  for (double t : cfg.profile.t_grid) {
    if (t < 0.0 || t > cfg.horizon) throw ConfigError("profile.t_grid: times must lie in [0, grid.horizon]");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return parse_config(doc, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::filesystem::path ExperimentConfig::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

Scenario ExperimentConfig::scenario() const {
  if (!model) throw ConfigError("market: section is required for this command");
  MarketParams params = market ? *market : read_market_record(resolve(*market_record));
  if (params.kind() != *model) throw ConfigError("market.from_calibration: record holds a different model");
  return Scenario{params, make_time_grid(horizon, steps), init};
}

Architecture ExperimentConfig::architecture() const { return Architecture::with_hidden(policy.hidden, policy.y_scale); }

json to_json(const ExperimentConfig& cfg) {
  json doc;
  doc["seed"] = cfg.seed;
  if (cfg.model) {
    json m;
    m["model"] = std::string(to_string(*cfg.model));
    m["r"] = cfg.r;
    if (cfg.market_record) {
      m["from_calibration"] = *cfg.market_record;
    } else if (cfg.market->is_gbm()) {
      m["mu"] = cfg.market->gbm().mu;
      m["sigma"] = cfg.market->gbm().sigma;
    } else {
      const HestonParams& h = cfg.market->heston();
      m["mu"] = h.mu;
      m["kappa"] = h.kappa;
      m["theta"] = h.theta;
      m["sigma_y"] = h.sigma_y;
      m["rho"] = h.rho;
    }
    m["s0"] = cfg.init.s0;
    m["w0"] = cfg.init.w0;
    if (!std::isnan(cfg.init.y0)) m["y0"] = cfg.init.y0;
    doc["market"] = m;
  }
  doc["grid"] = {{"horizon", cfg.horizon}, {"steps", cfg.steps}};
  doc["policy"] = {{"hidden", cfg.policy.hidden}, {"sigma_init", cfg.policy.sigma_init}, {"y_scale", cfg.policy.y_scale}};
  json inv = json::array();
  for (double x : cfg.eta_inv) inv.push_back(number_json(x));
  doc["utility"] = {{"eta_inv", inv}};
  json phases = json::array();
  for (const TrainingPhase& p : cfg.schedule) {
    phases.push_back({{"steps", p.steps}, {"batch", p.batch}, {"step_size", p.step_size}});
  }
  doc["schedule"] = phases;
  json training{{"checkpoint_every", cfg.training.checkpoint_every}};
  if (cfg.training.pool) {
    training["pool"] = {{"paths", cfg.training.pool->pool_paths},
                        {"validation_fraction", cfg.training.pool->validation_fraction},
                        {"validate_every", cfg.training.pool->validate_every}};
  }
  doc["training"] = training;
  doc["evaluation"] = {{"reps", cfg.evaluation.reps},
                       {"policies", cfg.evaluation.policies},
                       {"wealth_paths", cfg.evaluation.wealth_paths},
                       {"path_dump", cfg.evaluation.path_dump}};
  doc["profile"] = {{"t_grid", cfg.profile.t_grid}, {"average_points", cfg.profile.average_points}};
  if (!cfg.profile.y_grid.empty()) doc["profile"]["y_grid"] = cfg.profile.y_grid;
  if (cfg.calibration) {
    json c{{"prices", cfg.calibration->prices}, {"dt", cfg.calibration->dt}, {"models", cfg.calibration->models}};
    if (cfg.calibration->vix) c["vix"] = *cfg.calibration->vix;
    doc["calibration"] = c;
  }
  return doc;
}

std::string config_hash(const ExperimentConfig& config) { return hash_hex(to_json(config).dump()); }

MarketParams read_market_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open calibration record " + path.string());
  json doc;
  try {
    doc = json::parse(in);
    const std::string model = doc.at("model").get<std::string>();
    const json& p = doc.at("params");
    if (model == "gbm") {
      return MarketParams::gbm(p.at("r").get<double>(), p.at("mu").get<double>(), p.at("sigma").get<double>());
    }
    if (model == "heston") {
      return MarketParams::heston(p.at("r").get<double>(), p.at("mu").get<double>(), p.at("kappa").get<double>(),
                                  p.at("theta").get<double>(), p.at("sigma_y").get<double>(),
                                  p.at("rho").get<double>());
    }
    throw ConfigError(path.string() + ": unknown model '" + model + "'");
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<double> parse_grid_spec(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("grid is empty");
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw std::invalid_argument("grid '" + text + "' must look like a:b:n");
    const double a = parse_double(parts[0], "grid start");
    const double b = parse_double(parts[1], "grid end");
    const std::uint64_t n = parse_u64(parts[2], "grid count");
    if (n == 0) throw std::invalid_argument("grid '" + text + "' has no points");
    if (n == 1 && a != b) throw std::invalid_argument("grid '" + text + "': one point needs a == b");
    return linspace(a, b, n);
  }
  for (std::string_view field : split_csv_line(text)) {
    if (field.empty()) throw std::invalid_argument("grid '" + text + "' has an empty entry");
    out.push_back(parse_double(field, "grid value"));
  }
  return out;
}

}  // namespace annfolio::app
