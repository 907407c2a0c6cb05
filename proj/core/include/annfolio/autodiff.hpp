#pragma once

// Scalar reverse-mode differentiation over an explicit tape.
//
// Every arithmetic operation on a Var appends one node holding the indices of
// its (at most two) operands and the local partial derivatives with respect to
// them. A backward sweep in reverse record order accumulates adjoints. Values
// are computed with plain double arithmetic in the same order as the
// double-typed code, so a rollout templated on the scalar type produces
// bit-identical values on both instantiations.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace annfolio::ad {

class Tape {
 public:
  static constexpr std::int32_t kConstant = -1;

  struct Node {
    std::int32_t lhs = kConstant;
    std::int32_t rhs = kConstant;
    double d_lhs = 0.0;
    double d_rhs = 0.0;
  };

  std::int32_t push_leaf() { return push(kConstant, 0.0, kConstant, 0.0); }

  std::int32_t push(std::int32_t lhs, double d_lhs, std::int32_t rhs, double d_rhs) {
    nodes_.push_back(Node{lhs, rhs, d_lhs, d_rhs});
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  void clear() noexcept { nodes_.clear(); }
  void reserve(std::size_t n) { nodes_.reserve(n); }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Adjoints of every node with respect to `output` (seeded with 1).
  std::vector<double> backward(std::int32_t output) const {
    std::vector<double> adjoint(nodes_.size(), 0.0);
    if (output == kConstant) return adjoint;
    adjoint[static_cast<std::size_t>(output)] = 1.0;
    for (std::int32_t i = output; i >= 0; --i) {
      const double a = adjoint[static_cast<std::size_t>(i)];
      if (a == 0.0) continue;
      const Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.lhs != kConstant) adjoint[static_cast<std::size_t>(n.lhs)] += a * n.d_lhs;
      if (n.rhs != kConstant) adjoint[static_cast<std::size_t>(n.rhs)] += a * n.d_rhs;
    }
    return adjoint;
  }

 private:
  std::vector<Node> nodes_;
};

namespace detail {
inline thread_local Tape* active_tape = nullptr;

inline Tape& tape() {
  if (active_tape == nullptr) throw std::logic_error("ad::Var used without an active TapeScope");
  return *active_tape;
}
}  // namespace detail

/// Makes `tape` the recording target for Vars created on this thread.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape) noexcept : previous_(detail::active_tape) { detail::active_tape = &tape; }
  ~TapeScope() { detail::active_tape = previous_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

class Var {
 public:
  Var() = default;
  Var(double value) noexcept : value_(value) {}  // NOLINT: implicit constants are intended

  static Var leaf(double value) { return Var(value, detail::tape().push_leaf()); }

  double value() const noexcept { return value_; }
  std::int32_t id() const noexcept { return id_; }
  bool is_constant() const noexcept { return id_ == Tape::kConstant; }

  /// Result of a unary primitive with known value and derivative.
  static Var unary(const Var& x, double value, double derivative) {
    if (x.is_constant()) return Var(value);
    return Var(value, detail::tape().push(x.id_, derivative, Tape::kConstant, 0.0));
  }

  static Var binary(const Var& x, double dx, const Var& y, double dy, double value) {
    if (x.is_constant() && y.is_constant()) return Var(value);
    if (y.is_constant()) return Var(value, detail::tape().push(x.id_, dx, Tape::kConstant, 0.0));
    if (x.is_constant()) return Var(value, detail::tape().push(y.id_, dy, Tape::kConstant, 0.0));
    return Var(value, detail::tape().push(x.id_, dx, y.id_, dy));
  }

  Var& operator+=(const Var& o) { return *this = *this + o; }
  Var& operator-=(const Var& o) { return *this = *this - o; }
  Var& operator*=(const Var& o) { return *this = *this * o; }

  friend Var operator+(const Var& a, const Var& b) { return binary(a, 1.0, b, 1.0, a.value_ + b.value_); }
  friend Var operator-(const Var& a, const Var& b) { return binary(a, 1.0, b, -1.0, a.value_ - b.value_); }
  friend Var operator*(const Var& a, const Var& b) { return binary(a, b.value_, b, a.value_, a.value_ * b.value_); }
  friend Var operator/(const Var& a, const Var& b) {
    const double q = a.value_ / b.value_;
    return binary(a, 1.0 / b.value_, b, -q / b.value_, q);
  }
  friend Var operator-(const Var& a) { return unary(a, -a.value_, -1.0); }

 private:
  Var(double value, std::int32_t id) noexcept : value_(value), id_(id) {}

  double value_ = 0.0;
  std::int32_t id_ = Tape::kConstant;
};

inline double value_of(double x) noexcept { return x; }
inline double value_of(const Var& x) noexcept { return x.value(); }

inline Var exp(const Var& x) {
  const double e = std::exp(x.value());
  return Var::unary(x, e, e);
}
inline Var log(const Var& x) { return Var::unary(x, std::log(x.value()), 1.0 / x.value()); }
inline Var expm1(const Var& x) { return Var::unary(x, std::expm1(x.value()), std::exp(x.value())); }
inline Var sqrt(const Var& x) {
  const double s = std::sqrt(x.value());
  return Var::unary(x, s, 0.5 / s);
}

}  // namespace annfolio::ad
