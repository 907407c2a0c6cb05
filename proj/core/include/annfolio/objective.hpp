#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "annfolio/market.hpp"
#include "annfolio/policy_net.hpp"
#include "annfolio/utility.hpp"

namespace annfolio {

/// Empirical objective J and its gradient with respect to the flat theta.
struct ObjectiveValue {
  double J = 0.0;
  std::vector<double> gradient;
  std::size_t floor_events = 0;
};

/// Mean terminal utility over the paths of `noise` under the ANN policy.
double batch_utility(const PolicyParams& theta, const Scenario& scenario, const UtilitySpec& utility,
                     const NoiseBatch& noise, std::size_t* floor_events = nullptr);

/// J together with its exact pathwise gradient at fixed noise.
///
/// Each path is recorded on its own tape and swept in reverse; per-path
/// gradients are summed in path order. Steps at which wealth hit the floor
/// contribute a zero sub-gradient. The J field equals batch_utility() for the
/// same inputs bit for bit.
ObjectiveValue batch_utility_gradient(const PolicyParams& theta, const Scenario& scenario,
                                      const UtilitySpec& utility, const NoiseBatch& noise);

/// Central differences of an arbitrary function at `x`.
std::vector<double> finite_diff_gradient(const std::function<double(std::span<const double>)>& f,
                                         std::span<const double> x, double h);

/// Central-difference gradient of batch_utility at fixed noise.
std::vector<double> finite_diff_gradient(const PolicyParams& theta, const Scenario& scenario,
                                         const UtilitySpec& utility, const NoiseBatch& noise, double h);

}  // namespace annfolio
