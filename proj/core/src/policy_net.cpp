#include "annfolio/policy_net.hpp"

#include <stdexcept>
#include <utility>

#include "annfolio/rng.hpp"

namespace annfolio {

Architecture::Architecture(std::vector<std::size_t> widths, double y_scale)
    : widths_(std::move(widths)), y_scale_(y_scale) {
  if (!(y_scale_ > 0.0) || !std::isfinite(y_scale_)) throw std::invalid_argument("architecture: y_scale must be > 0");
  if (widths_.size() < 2) throw std::invalid_argument("architecture: need at least two layers");
  if (widths_.front() != 2) throw std::invalid_argument("architecture: input width must be 2");
  if (widths_.back() != 1) throw std::invalid_argument("architecture: output width must be 1");
  for (std::size_t w : widths_) {
    if (w == 0) throw std::invalid_argument("architecture: layer widths must be >= 1");
  }
}

Architecture Architecture::with_hidden(std::span<const std::size_t> hidden, double y_scale) {
  std::vector<std::size_t> widths{2};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  return Architecture(std::move(widths), y_scale);
}

std::size_t param_count(const Architecture& arch) noexcept {
  std::size_t total = 0;
  for (std::size_t layer = 0; layer < arch.layers(); ++layer) {
    total += arch.output_width(layer) * arch.input_width(layer) + arch.output_width(layer);
  }
  return total;
}

PolicyParams::PolicyParams(Architecture arch) : arch_(std::move(arch)), values_(param_count(arch_), 0.0) {}

PolicyParams::PolicyParams(Architecture arch, std::vector<double> flat)
    : arch_(std::move(arch)), values_(std::move(flat)) {
  if (values_.size() != param_count(arch_)) {
    throw std::invalid_argument("policy params: flat length " + std::to_string(values_.size()) +
                                " does not match architecture (" + std::to_string(param_count(arch_)) + ")");
  }
}

std::size_t PolicyParams::weight_index(std::size_t layer, std::size_t row, std::size_t col) const noexcept {
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layer; ++l) {
    offset += arch_.output_width(l) * arch_.input_width(l) + arch_.output_width(l);
  }
  return offset + row * arch_.input_width(layer) + col;
}

std::size_t PolicyParams::bias_index(std::size_t layer, std::size_t row) const noexcept {
  return weight_index(layer, 0, 0) + arch_.output_width(layer) * arch_.input_width(layer) + row;
}

void PolicyParams::validate() const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw std::invalid_argument("policy params: entry " + std::to_string(i) + " is not finite");
    }
  }
}

double forward(const PolicyParams& theta, double t, double y, double horizon) {
  return forward_flat<double>(theta.arch(), theta.flat(), t / horizon, y);
}

PolicyParams init_params(const Architecture& arch, double sigma_init, std::uint64_t seed) {
  if (!(sigma_init >= 0.0)) throw std::invalid_argument("init: sigma_init must be >= 0");
  PolicyParams theta(arch);
  NormalSequence normals(seed);
  for (double& v : theta.flat()) v = sigma_init * normals.next();
  return theta;
}

}  // namespace annfolio
