#pragma once

// Scalar reverse-mode automatic differentiation.
//
// A Tape records every intermediate scalar as a node together with the local
// partial derivatives with respect to its parents. Nodes are appended in
// evaluation order, so parents always precede children and a single reverse
// sweep accumulates adjoints. Besides the elementary unary/binary primitives
// the tape has n-ary `sum` and `dot` nodes so that a dense layer costs one
// node per output unit instead of two per weight.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "drift/errors.hpp"

namespace drift {

enum class Op : std::uint8_t {
  Const,
  Param,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Exp,
  Log,
  Tanh,
  Softplus,
  Sigmoid,
  PowConst,
  MinConst,
  MaxConst,
  Sum,
  Dot,
  Custom,
};

const char* op_name(Op op);

class Tape;

class Var {
 public:
  Var() = default;

  double value() const { return value_; }
  std::uint32_t index() const { return index_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t index, double value)
      : tape_(tape), index_(index), value_(value) {}

  Tape* tape_ = nullptr;
  std::uint32_t index_ = 0;
  double value_ = 0.0;
};

// Adjoints of the differentiable leaves, indexed by registration order of
// `Tape::param`.
struct Gradient {
  std::vector<double> by_param;
  std::vector<std::uint32_t> param_nodes;
  bool finite = true;

  // d(root)/d(v) if v is a param leaf of the tape that produced this
  // gradient; empty for lifted constants and interior nodes.
  std::optional<double> of(const Var& v) const;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var lift(double constant);
  Var param(double initial);

  // Node with one parent: value and d(value)/d(a) supplied by the caller.
  Var unary(Op op, double value, const Var& a, double da) {
    check_same(a);
    const auto idx = push_node(op, value, 1);
    parents_.push_back(a.index_);
    partials_.push_back(da);
    return Var(this, idx, value);
  }

  Var binary(Op op, double value, const Var& a, double da, const Var& b,
             double db) {
    check_same(a);
    check_same(b);
    const auto idx = push_node(op, value, 2);
    parents_.push_back(a.index_);
    partials_.push_back(da);
    parents_.push_back(b.index_);
    partials_.push_back(db);
    return Var(this, idx, value);
  }

  // Sum of terms; `sum({})` is a constant zero.
  Var sum(std::span<const Var> terms);
  // Inner product of two Var sequences, optionally plus a Var bias.
  Var dot(std::span<const Var> a, std::span<const Var> b,
          const Var* bias = nullptr);
  // Inner product with constant coefficients.
  Var dot(std::span<const Var> a, std::span<const double> coeffs,
          const Var* bias = nullptr);

  // Seeds d(root)/d(root) = 1 and sweeps in reverse. Repeated calls on the
  // same tape give identical results: adjoints are reset every time.
  Gradient backward(const Var& root);

  void clear();
  void reserve(std::size_t nodes, std::size_t edges);

  std::size_t size() const { return values_.size(); }
  std::size_t num_params() const { return param_nodes_.size(); }
  Op op(std::uint32_t node) const { return ops_[node]; }
  double value(std::uint32_t node) const { return values_[node]; }
  std::span<const std::uint32_t> parents(std::uint32_t node) const {
    return {parents_.data() + edge_begin_[node],
            edge_begin_[node + 1] - edge_begin_[node]};
  }
  bool is_param(std::uint32_t node) const;

 private:
  std::uint32_t push_node(Op op, double value, std::uint32_t n_edges) {
    const auto idx = static_cast<std::uint32_t>(values_.size());
    values_.push_back(value);
    ops_.push_back(op);
    if (edge_begin_.empty()) edge_begin_.push_back(0);
    edge_begin_.push_back(edge_begin_.back() + n_edges);
    return idx;
  }
  void check_same(const Var& v) const {
    if (v.tape_ != this) throw Error("Var belongs to a different tape");
  }

  std::vector<double> values_;
  std::vector<Op> ops_;
  std::vector<std::uint32_t> edge_begin_;
  std::vector<std::uint32_t> parents_;
  std::vector<double> partials_;
  std::vector<std::uint32_t> param_nodes_;
  std::vector<double> adjoint_;
};

// ---------------------------------------------------------------------------
// Plain-double versions of the non-standard primitives, so that model code
// can be written once as a template over double and Var.

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

// Inverse of softplus for y > 0.
inline double softplus_inv(double y) {
  if (!(y > 0.0)) throw DomainError("softplus_inv requires a positive argument");
  return y > 30.0 ? y + std::log(-std::expm1(-y)) : std::log(std::expm1(y));
}

inline double value_of(double x) { return x; }
inline double value_of(const Var& v) { return v.value(); }

// ---------------------------------------------------------------------------
// Var arithmetic.

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);

Var operator+(const Var& a, double c);
Var operator+(double c, const Var& a);
Var operator-(const Var& a, double c);
Var operator-(double c, const Var& a);
Var operator*(const Var& a, double c);
Var operator*(double c, const Var& a);
Var operator/(const Var& a, double c);
Var operator/(double c, const Var& a);

Var exp(const Var& a);
Var log(const Var& a);
Var tanh(const Var& a);
Var softplus(const Var& a);
Var sigmoid(const Var& a);
Var pow(const Var& a, double exponent);
Var min(const Var& a, double c);
Var max(const Var& a, double c);
inline Var relu(const Var& a) { return max(a, 0.0); }

using std::exp;
using std::log;
using std::tanh;
using std::pow;

inline double min(double a, double c) { return a < c ? a : c; }
inline double max(double a, double c) { return a > c ? a : c; }

// ---------------------------------------------------------------------------
// Generic n-ary helpers used by model code.

inline double sum(std::span<const double> terms) {
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}
Var sum(std::span<const Var> terms);

inline double dot(std::span<const double> a, std::span<const double> b,
                  const double* bias = nullptr) {
  double s = bias ? *bias : 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
Var dot(std::span<const Var> a, std::span<const Var> b,
        const Var* bias = nullptr);
Var dot(std::span<const Var> a, std::span<const double> coeffs,
        const Var* bias = nullptr);

// Slot factory: turns a constant into the scalar type S. For Var this lifts
// onto the tape of `like`.
inline double constant_like(const double&, double c) { return c; }
Var constant_like(const Var& like, double c);

}  // namespace drift
