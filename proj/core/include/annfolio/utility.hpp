#pragma once

#include <cmath>

#include "annfolio/autodiff.hpp"

namespace annfolio {

/// Relative risk aversion of the isoelastic utility; eta == 1 is log utility.
struct UtilitySpec {
  double eta = 1.0;

  bool is_log() const noexcept { return eta == 1.0; }
  void validate() const;
};

/// (w^{1-eta} - 1) / (1 - eta), or ln w for eta = 1. Throws for w <= 0.
double isoelastic_utility(double wealth, double eta);

inline double isoelastic_utility(double wealth, const UtilitySpec& u) { return isoelastic_utility(wealth, u.eta); }

/// Marginal utility w^{-eta}.
inline double marginal_utility(double wealth, double eta) noexcept {
  return eta == 1.0 ? 1.0 / wealth : std::exp(-eta * std::log(wealth));
}

inline ad::Var isoelastic_utility(const ad::Var& wealth, const UtilitySpec& u) {
  return ad::Var::unary(wealth, isoelastic_utility(wealth.value(), u.eta), marginal_utility(wealth.value(), u.eta));
}

}  // namespace annfolio
