#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace annfolio {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double delta = 1e-8;

  explicit AdamState(std::size_t n_params = 0) : m(n_params, 0.0), v(n_params, 0.0) {}

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Bias-corrected Adam update in the ascent direction:
/// theta += step_size * m_hat / (sqrt(v_hat) + delta).
///
/// Throws std::runtime_error on a non-finite gradient entry, leaving both
/// state and theta untouched.
void adam_step(AdamState& state, std::span<double> theta, std::span<const double> ascent_gradient,
               double step_size);

}  // namespace annfolio
