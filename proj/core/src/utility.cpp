#include "annfolio/utility.hpp"

#include <stdexcept>

namespace annfolio {

void UtilitySpec::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("utility: eta must be finite and >= 0");
}

double isoelastic_utility(double wealth, double eta) {
  if (!(wealth > 0.0)) throw std::invalid_argument("utility: wealth must be > 0");
  const double log_w = std::log(wealth);
  if (eta == 1.0) return log_w;
  // expm1 keeps the power branch accurate as eta -> 1.
  const double one_minus_eta = 1.0 - eta;
  return std::expm1(one_minus_eta * log_w) / one_minus_eta;
}

}  // namespace annfolio
