#include "annfolio/objective.hpp"

#include <stdexcept>

#include "annfolio/autodiff.hpp"

namespace annfolio {

namespace {

void check_inputs(const PolicyParams& theta, const Scenario& scenario, const UtilitySpec& utility,
                  const NoiseBatch& noise) {
  utility.validate();
  if (noise.paths() == 0) throw std::invalid_argument("objective: noise batch is empty");
  if (noise.steps() != scenario.grid.steps()) {
    throw std::invalid_argument("objective: noise batch has " + std::to_string(noise.steps()) +
                                " steps but the grid has " + std::to_string(scenario.grid.steps()));
  }
  if (theta.size() != param_count(theta.arch())) throw std::invalid_argument("objective: theta shape mismatch");
}

}  // namespace

double batch_utility(const PolicyParams& theta, const Scenario& scenario, const UtilitySpec& utility,
                     const NoiseBatch& noise, std::size_t* floor_events) {
  check_inputs(theta, scenario, utility, noise);
  const double horizon = scenario.grid.horizon();
  const Architecture& arch = theta.arch();
  const std::span<const double> flat = theta.flat();
  auto policy = [&](double t, double y) { return forward_flat<double>(arch, flat, t / horizon, y); };

  std::size_t floors = 0;
  double total = 0.0;
  for (std::size_t b = 0; b < noise.paths(); ++b) {
    const double wealth = simulate_path<double>(scenario, noise.path(b), policy, floors);
    total += isoelastic_utility(wealth, utility);
  }
  if (floor_events != nullptr) *floor_events = floors;
  return total / static_cast<double>(noise.paths());
}

ObjectiveValue batch_utility_gradient(const PolicyParams& theta, const Scenario& scenario,
                                      const UtilitySpec& utility, const NoiseBatch& noise) {
  check_inputs(theta, scenario, utility, noise);
  const double horizon = scenario.grid.horizon();
  const Architecture& arch = theta.arch();
  const std::size_t n_params = theta.size();

  ObjectiveValue out;
  out.gradient.assign(n_params, 0.0);

  ad::Tape tape;
  ad::TapeScope scope(tape);
  std::vector<ad::Var> leaves(n_params);
  double total = 0.0;
  for (std::size_t b = 0; b < noise.paths(); ++b) {
    tape.clear();
    for (std::size_t i = 0; i < n_params; ++i) leaves[i] = ad::Var::leaf(theta.flat()[i]);
    const std::span<const ad::Var> flat(leaves);
    auto policy = [&](double t, double y) { return forward_flat<ad::Var>(arch, flat, t / horizon, y); };

    const ad::Var wealth = simulate_path<ad::Var>(scenario, noise.path(b), policy, out.floor_events);
    const ad::Var u = isoelastic_utility(wealth, utility);
    total += u.value();

    const std::vector<double> adjoint = tape.backward(u.id());
    for (std::size_t i = 0; i < n_params; ++i) out.gradient[i] += adjoint[i];
  }
  const double inv_b = 1.0 / static_cast<double>(noise.paths());
  out.J = total / static_cast<double>(noise.paths());
  for (double& g : out.gradient) g *= inv_b;
  return out;
}

std::vector<double> finite_diff_gradient(const std::function<double(std::span<const double>)>& f,
                                         std::span<const double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite differences: h must be > 0");
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    point[i] = x[i] + h;
    const double up = f(point);
    point[i] = x[i] - h;
    const double down = f(point);
    point[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

std::vector<double> finite_diff_gradient(const PolicyParams& theta, const Scenario& scenario,
                                         const UtilitySpec& utility, const NoiseBatch& noise, double h) {
  auto objective = [&](std::span<const double> flat) {
    const PolicyParams shifted(theta.arch(), std::vector<double>(flat.begin(), flat.end()));
    return batch_utility(shifted, scenario, utility, noise);
  };
  return finite_diff_gradient(objective, theta.flat(), h);
}

}  // namespace annfolio
