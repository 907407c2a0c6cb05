#include "annfolio/rng.hpp"

#include <cmath>
#include <numbers>

namespace annfolio {

std::pair<double, double> CounterStream::normal_pair(std::uint64_t counter) const noexcept {
  // u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

double NormalSequence::next() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const auto [z1, z2] = stream_.normal_pair(counter_++);
  spare_ = z2;
  has_spare_ = true;
  return z1;
}

}  // namespace annfolio
