#include "annfolio/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace annfolio {

void adam_step(AdamState& state, std::span<double> theta, std::span<const double> ascent_gradient,
               double step_size) {
  const std::size_t n = theta.size();
  if (ascent_gradient.size() != n || state.m.size() != n || state.v.size() != n) {
    throw std::invalid_argument("adam: gradient, moments and parameters must have equal length");
  }
  if (!(step_size > 0.0)) throw std::invalid_argument("adam: step size must be > 0");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(ascent_gradient[i])) {
      throw std::runtime_error("adam: non-finite gradient at coordinate " + std::to_string(i) + " (step " +
                               std::to_string(state.step + 1) + ")");
    }
  }

  ++state.step;
  const double k = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, k);
  const double correction2 = 1.0 - std::pow(state.beta2, k);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = ascent_gradient[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    theta[i] += step_size * m_hat / (std::sqrt(v_hat) + state.delta);
  }
}

}  // namespace annfolio
