#pragma once

// Invariants and properties of every module, written once and run both by
// the unit tests (one gtest case each) and by the acceptance binary.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <annfolio/market.hpp>
#include <annfolio/objective.hpp>

namespace props {

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Property {
  std::string module;
  std::string name;  // identifier-safe
  std::function<Outcome()> check;
};

const std::vector<Property>& all();

/// Scenario with the reference GBM or Heston parameters.
annfolio::Scenario gbm_scenario(std::size_t steps, double horizon = 1.0);
annfolio::Scenario heston_scenario(std::size_t steps, double horizon = 1.0);

struct GradientCheck {
  double worst_ratio = 0.0;  // max over coordinates of |g - fd| / max(1e-5 |fd|, 1e-8); <= 1 passes
  std::size_t coordinates = 0;
  std::size_t floor_events = 0;
  bool j_matches_oracle = false;
};

/// Pathwise gradient against central differences of the test-side rollout,
/// common noise, h = 1e-5.
GradientCheck gradient_against_oracle(const annfolio::Scenario& scenario, const annfolio::PolicyParams& theta,
                                      double eta, std::size_t batch, std::uint64_t noise_seed);

std::string fmt(double x);

}  // namespace props
