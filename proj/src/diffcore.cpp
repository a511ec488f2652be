#include "drift/diffcore.hpp"

#include <algorithm>

namespace drift {

const char* op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::Param: return "param";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Neg: return "neg";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Tanh: return "tanh";
    case Op::Softplus: return "softplus";
    case Op::Sigmoid: return "sigmoid";
    case Op::PowConst: return "pow_const";
    case Op::MinConst: return "min_const";
    case Op::MaxConst: return "max_const";
    case Op::Sum: return "sum";
    case Op::Dot: return "dot";
    case Op::Custom: return "custom";
  }
  return "?";
}

std::optional<double> Gradient::of(const Var& v) const {
  const auto it = std::lower_bound(param_nodes.begin(), param_nodes.end(),
                                   v.index());
  if (it == param_nodes.end() || *it != v.index()) return std::nullopt;
  return by_param[static_cast<std::size_t>(it - param_nodes.begin())];
}

Var Tape::lift(double constant) {
  if (!std::isfinite(constant)) throw NonFiniteError("lift: non-finite constant");
  const auto idx = push_node(Op::Const, constant, 0);
  return Var(this, idx, constant);
}

Var Tape::param(double initial) {
  if (!std::isfinite(initial)) throw NonFiniteError("param: non-finite initial value");
  const auto idx = push_node(Op::Param, initial, 0);
  param_nodes_.push_back(idx);
  return Var(this, idx, initial);
}

bool Tape::is_param(std::uint32_t node) const {
  return std::binary_search(param_nodes_.begin(), param_nodes_.end(), node);
}

Var Tape::sum(std::span<const Var> terms) {
  if (terms.empty()) return lift(0.0);
  double s = 0.0;
  for (const auto& t : terms) {
    check_same(t);
    s += t.value_;
  }
  const auto idx = push_node(Op::Sum, s, static_cast<std::uint32_t>(terms.size()));
  for (const auto& t : terms) {
    parents_.push_back(t.index_);
    partials_.push_back(1.0);
  }
  return Var(this, idx, s);
}

Var Tape::dot(std::span<const Var> a, std::span<const Var> b, const Var* bias) {
  if (a.size() != b.size()) throw Error("dot: length mismatch");
  double s = 0.0;
  if (bias) {
    check_same(*bias);
    s = bias->value_;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    check_same(a[i]);
    check_same(b[i]);
    s += a[i].value_ * b[i].value_;
  }
  const auto n = static_cast<std::uint32_t>(2 * a.size() + (bias ? 1 : 0));
  const auto idx = push_node(Op::Dot, s, n);
  for (std::size_t i = 0; i < a.size(); ++i) {
    parents_.push_back(a[i].index_);
    partials_.push_back(b[i].value_);
    parents_.push_back(b[i].index_);
    partials_.push_back(a[i].value_);
  }
  if (bias) {
    parents_.push_back(bias->index_);
    partials_.push_back(1.0);
  }
  return Var(this, idx, s);
}

Var Tape::dot(std::span<const Var> a, std::span<const double> coeffs,
              const Var* bias) {
  if (a.size() != coeffs.size()) throw Error("dot: length mismatch");
  double s = 0.0;
  if (bias) {
    check_same(*bias);
    s = bias->value_;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    check_same(a[i]);
    s += a[i].value_ * coeffs[i];
  }
  const auto n = static_cast<std::uint32_t>(a.size() + (bias ? 1 : 0));
  const auto idx = push_node(Op::Dot, s, n);
  for (std::size_t i = 0; i < a.size(); ++i) {
    parents_.push_back(a[i].index_);
    partials_.push_back(coeffs[i]);
  }
  if (bias) {
    parents_.push_back(bias->index_);
    partials_.push_back(1.0);
  }
  return Var(this, idx, s);
}

Gradient Tape::backward(const Var& root) {
  check_same(root);
  adjoint_.assign(values_.size(), 0.0);
  adjoint_[root.index_] = 1.0;
  for (std::int64_t i = root.index_; i >= 0; --i) {
    const double a = adjoint_[static_cast<std::size_t>(i)];
    if (a == 0.0) continue;
    const auto begin = edge_begin_[static_cast<std::size_t>(i)];
    const auto end = edge_begin_[static_cast<std::size_t>(i) + 1];
    for (auto e = begin; e < end; ++e) adjoint_[parents_[e]] += a * partials_[e];
  }
  Gradient g;
  g.param_nodes = param_nodes_;
  g.by_param.resize(param_nodes_.size());
  for (std::size_t k = 0; k < param_nodes_.size(); ++k) {
    g.by_param[k] = adjoint_[param_nodes_[k]];
    if (!std::isfinite(g.by_param[k])) g.finite = false;
  }
  return g;
}

void Tape::clear() {
  values_.clear();
  ops_.clear();
  edge_begin_.clear();
  parents_.clear();
  partials_.clear();
  param_nodes_.clear();
}

void Tape::reserve(std::size_t nodes, std::size_t edges) {
  values_.reserve(nodes);
  ops_.reserve(nodes);
  edge_begin_.reserve(nodes + 1);
  parents_.reserve(edges);
  partials_.reserve(edges);
}

// ---------------------------------------------------------------------------

namespace {

Tape& tape_of(const Var& a) {
  if (a.tape() == nullptr) throw Error("Var is not attached to a tape");
  return *a.tape();
}

}  // namespace

Var operator+(const Var& a, const Var& b) {
  return tape_of(a).binary(Op::Add, a.value() + b.value(), a, 1.0, b, 1.0);
}

Var operator-(const Var& a, const Var& b) {
  return tape_of(a).binary(Op::Sub, a.value() - b.value(), a, 1.0, b, -1.0);
}

Var operator*(const Var& a, const Var& b) {
  return tape_of(a).binary(Op::Mul, a.value() * b.value(), a, b.value(), b,
                           a.value());
}

Var operator/(const Var& a, const Var& b) {
  if (b.value() == 0.0) throw DomainError("division by zero");
  const double q = a.value() / b.value();
  return tape_of(a).binary(Op::Div, q, a, 1.0 / b.value(), b, -q / b.value());
}

Var operator-(const Var& a) { return tape_of(a).unary(Op::Neg, -a.value(), a, -1.0); }

Var operator+(const Var& a, double c) {
  return tape_of(a).unary(Op::Add, a.value() + c, a, 1.0);
}
Var operator+(double c, const Var& a) { return a + c; }
Var operator-(const Var& a, double c) {
  return tape_of(a).unary(Op::Sub, a.value() - c, a, 1.0);
}
Var operator-(double c, const Var& a) {
  return tape_of(a).unary(Op::Sub, c - a.value(), a, -1.0);
}
Var operator*(const Var& a, double c) {
  return tape_of(a).unary(Op::Mul, a.value() * c, a, c);
}
Var operator*(double c, const Var& a) { return a * c; }
Var operator/(const Var& a, double c) {
  if (c == 0.0) throw DomainError("division by zero");
  return tape_of(a).unary(Op::Div, a.value() / c, a, 1.0 / c);
}
Var operator/(double c, const Var& a) {
  if (a.value() == 0.0) throw DomainError("division by zero");
  const double q = c / a.value();
  return tape_of(a).unary(Op::Div, q, a, -q / a.value());
}

Var exp(const Var& a) {
  const double e = std::exp(a.value());
  return tape_of(a).unary(Op::Exp, e, a, e);
}

Var log(const Var& a) {
  if (!(a.value() > 0.0)) throw DomainError("log of non-positive value");
  return tape_of(a).unary(Op::Log, std::log(a.value()), a, 1.0 / a.value());
}

Var tanh(const Var& a) {
  const double t = std::tanh(a.value());
  return tape_of(a).unary(Op::Tanh, t, a, 1.0 - t * t);
}

Var softplus(const Var& a) {
  return tape_of(a).unary(Op::Softplus, softplus(a.value()), a, sigmoid(a.value()));
}

Var sigmoid(const Var& a) {
  const double s = sigmoid(a.value());
  return tape_of(a).unary(Op::Sigmoid, s, a, s * (1.0 - s));
}

Var pow(const Var& a, double exponent) {
  const double x = a.value();
  if (x < 0.0 && exponent != std::floor(exponent))
    throw DomainError("pow: negative base with non-integer exponent");
  if (x == 0.0 && exponent < 1.0 && exponent != 0.0)
    throw DomainError("pow: derivative undefined at zero");
  const double v = std::pow(x, exponent);
  const double d = exponent == 0.0 ? 0.0 : exponent * std::pow(x, exponent - 1.0);
  return tape_of(a).unary(Op::PowConst, v, a, d);
}

Var min(const Var& a, double c) {
  const bool pass = a.value() < c;
  return tape_of(a).unary(Op::MinConst, pass ? a.value() : c, a, pass ? 1.0 : 0.0);
}

Var max(const Var& a, double c) {
  const bool pass = a.value() > c;
  return tape_of(a).unary(Op::MaxConst, pass ? a.value() : c, a, pass ? 1.0 : 0.0);
}

Var sum(std::span<const Var> terms) {
  if (terms.empty()) throw Error("sum of an empty Var sequence has no tape");
  return tape_of(terms[0]).sum(terms);
}

Var dot(std::span<const Var> a, std::span<const Var> b, const Var* bias) {
  if (a.empty()) {
    if (bias) return tape_of(*bias).dot(a, b, bias);
    throw Error("dot of empty Var sequences has no tape");
  }
  return tape_of(a[0]).dot(a, b, bias);
}

Var dot(std::span<const Var> a, std::span<const double> coeffs, const Var* bias) {
  if (a.empty()) {
    if (bias) return tape_of(*bias).dot(a, coeffs, bias);
    throw Error("dot of empty Var sequences has no tape");
  }
  return tape_of(a[0]).dot(a, coeffs, bias);
}

Var constant_like(const Var& like, double c) { return tape_of(like).lift(c); }

}  // namespace drift
