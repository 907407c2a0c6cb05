#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "annfolio/autodiff.hpp"

namespace annfolio {

/// Layer widths n_0..n_d of the feedback network, n_0 = 2 inputs (t/T, y)
/// and n_d = 1 output (the stock weight).
///
/// The variance input is multiplied by y_scale() before the first layer
/// (1 by default, i.e. raw y).
class Architecture {
 public:
  explicit Architecture(std::vector<std::size_t> widths, double y_scale = 1.0);

  /// [2, hidden..., 1].
  static Architecture with_hidden(std::span<const std::size_t> hidden, double y_scale = 1.0);

  const std::vector<std::size_t>& widths() const noexcept { return widths_; }
  std::size_t layers() const noexcept { return widths_.size() - 1; }
  std::size_t input_width(std::size_t layer) const noexcept { return widths_[layer]; }
  std::size_t output_width(std::size_t layer) const noexcept { return widths_[layer + 1]; }
  double y_scale() const noexcept { return y_scale_; }

  friend bool operator==(const Architecture&, const Architecture&) = default;

 private:
  std::vector<std::size_t> widths_;
  double y_scale_ = 1.0;
};

/// sum_i (n_i n_{i-1} + n_i).
std::size_t param_count(const Architecture& arch) noexcept;

/// x / (1 + e^{-x}).
inline double silu(double x) noexcept { return x / (1.0 + std::exp(-x)); }

inline ad::Var silu(const ad::Var& x) {
  const double v = x.value();
  const double sig = 1.0 / (1.0 + std::exp(-v));
  return ad::Var::unary(x, silu(v), sig * (1.0 + v * (1.0 - sig)));
}

/// Flat parameter vector theta plus its architecture.
///
/// Layout: layers in order, each as its weight matrix (row-major,
/// n_i x n_{i-1}) followed by its bias vector. The flat vector is the
/// canonical storage, so flatten/restore is the identity.
class PolicyParams {
 public:
  explicit PolicyParams(Architecture arch);  // all zeros
  PolicyParams(Architecture arch, std::vector<double> flat);

  const Architecture& arch() const noexcept { return arch_; }
  std::span<const double> flat() const noexcept { return values_; }
  std::span<double> flat() noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  /// Offset of W_layer(row, col) in the flat vector.
  std::size_t weight_index(std::size_t layer, std::size_t row, std::size_t col) const noexcept;
  /// Offset of b_layer(row) in the flat vector.
  std::size_t bias_index(std::size_t layer, std::size_t row) const noexcept;

  /// Throws if any entry is non-finite.
  void validate() const;

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;

 private:
  Architecture arch_;
  std::vector<double> values_;
};

/// Network output for inputs (x0, x1 * y_scale) and parameters `theta` laid out as
/// in PolicyParams. Hidden layers use SiLU, the output layer is linear.
template <class T>
T forward_flat(const Architecture& arch, std::span<const T> theta, double x0, double x1) {
  std::vector<T> current{T(x0), T(x1 * arch.y_scale())};
  std::vector<T> next;
  std::size_t offset = 0;
  const std::size_t last = arch.layers() - 1;
  for (std::size_t layer = 0; layer < arch.layers(); ++layer) {
    const std::size_t n_in = arch.input_width(layer);
    const std::size_t n_out = arch.output_width(layer);
    const std::size_t bias_offset = offset + n_in * n_out;
    next.assign(n_out, T(0.0));
    for (std::size_t row = 0; row < n_out; ++row) {
      T z = theta[bias_offset + row];
      for (std::size_t col = 0; col < n_in; ++col) z = z + theta[offset + row * n_in + col] * current[col];
      next[row] = layer == last ? z : silu(z);
    }
    offset = bias_offset + n_out;
    current.swap(next);
  }
  return current[0];
}

/// pi(t, y) with the time input rescaled to t / horizon.
double forward(const PolicyParams& theta, double t, double y, double horizon);

/// Entries i.i.d. N(0, sigma_init^2) drawn from a stream keyed by `seed`.
PolicyParams init_params(const Architecture& arch, double sigma_init, std::uint64_t seed);

}  // namespace annfolio
