#include "annfolio/baselines.hpp"

#include <algorithm>
#include <stdexcept>

#include "annfolio/export.hpp"

namespace annfolio {

double merton_ratio_gbm(double mu, double r, double sigma, double eta) {
  if (!(sigma > 0.0)) throw std::invalid_argument("merton ratio: sigma must be > 0");
  if (!(eta > 0.0)) throw std::invalid_argument("merton ratio: eta must be > 0 (risk-neutral demand is unbounded)");
  return (mu - r) / (eta * sigma * sigma);
}

double myopic_weight_heston(double mu, double r, double y) {
  if (!(y > 0.0)) throw std::invalid_argument("myopic weight: y must be > 0");
  return (mu - r) / y;
}

std::string Policy::name() const {
  struct Namer {
    std::string operator()(const ConstantPolicy& p) const { return "constant:" + format_double(p.weight); }
    std::string operator()(const AnalyticGbmPolicy&) const { return "analytic"; }
    std::string operator()(const MyopicHestonPolicy&) const { return "myopic"; }
    std::string operator()(const AnnPolicy&) const { return "ann"; }
  };
  return std::visit(Namer{}, v_);
}

double Policy::weight(double t, double y, const MarketParams& params, double horizon) const {
  struct Evaluator {
    double t, y, horizon;
    const MarketParams& params;

    double operator()(const ConstantPolicy& p) const { return p.weight; }
    double operator()(const AnalyticGbmPolicy& p) const {
      const GbmParams& g = params.gbm();
      return merton_ratio_gbm(g.mu, g.r, g.sigma, p.eta);
    }
    double operator()(const MyopicHestonPolicy&) const {
      return myopic_weight_heston(params.mu(), params.r(), std::max(y, kMyopicVarianceFloor));
    }
    double operator()(const AnnPolicy& p) const { return forward(p.theta, t, y, horizon); }
  };
  return std::visit(Evaluator{t, y, horizon, params}, v_);
}

PolicyFunction Policy::bind(const Scenario& scenario) const {
  const MarketParams params = scenario.params;
  const double horizon = scenario.grid.horizon();
  // Closed forms that do not depend on the state are evaluated once.
  if (const auto* c = std::get_if<ConstantPolicy>(&v_)) {
    const double w = c->weight;
    return [w](double, double) { return w; };
  }
  if (std::holds_alternative<AnalyticGbmPolicy>(v_)) {
    const double w = weight(0.0, params.long_run_variance(), params, horizon);
    return [w](double, double) { return w; };
  }
  if (const auto* a = std::get_if<AnnPolicy>(&v_)) {
    return [theta = a->theta, horizon](double t, double y) {
      return forward_flat<double>(theta.arch(), theta.flat(), t / horizon, y);
    };
  }
  return [self = *this, params, horizon](double t, double y) { return self.weight(t, y, params, horizon); };
}

}  // namespace annfolio
