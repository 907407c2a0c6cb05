#pragma once

#include <string>
#include <variant>

#include "annfolio/market.hpp"
#include "annfolio/policy_net.hpp"

namespace annfolio {

/// Classical Merton ratio (mu - r) / (eta sigma^2). Throws for eta <= 0 or sigma <= 0.
double merton_ratio_gbm(double mu, double r, double sigma, double eta);

/// Log-utility optimal Heston weight (mu - r) / y. Throws for y <= 0.
double myopic_weight_heston(double mu, double r, double y);

/// Smallest variance the myopic policy is evaluated at inside a simulation.
/// Full truncation can leave Y at (or below) zero, where (mu - r) / y is
/// unbounded.
inline constexpr double kMyopicVarianceFloor = 1e-4;

struct ConstantPolicy {
  double weight = 0.0;
};

struct AnalyticGbmPolicy {
  double eta = 1.0;
};

struct MyopicHestonPolicy {};

struct AnnPolicy {
  PolicyParams theta;
};

/// Feedback rule (t, y) -> stock weight.
class Policy {
 public:
  using Variant = std::variant<ConstantPolicy, AnalyticGbmPolicy, MyopicHestonPolicy, AnnPolicy>;

  Policy(Variant v) : v_(std::move(v)) {}  // NOLINT

  static Policy constant(double weight) { return Policy(ConstantPolicy{weight}); }
  static Policy analytic_gbm(double eta) { return Policy(AnalyticGbmPolicy{eta}); }
  static Policy myopic_heston() { return Policy(MyopicHestonPolicy{}); }
  static Policy ann(PolicyParams theta) { return Policy(AnnPolicy{std::move(theta)}); }

  /// Label used in reports: "constant:<w>", "analytic", "myopic" or "ann".
  std::string name() const;

  const Variant& variant() const noexcept { return v_; }

  /// Stock weight at time t and squared volatility y. `horizon` rescales the
  /// ANN time input.
  double weight(double t, double y, const MarketParams& params, double horizon) const;

  /// Callable bound to a scenario, for simulate_batch.
  PolicyFunction bind(const Scenario& scenario) const;

 private:
  Variant v_;
};

}  // namespace annfolio
