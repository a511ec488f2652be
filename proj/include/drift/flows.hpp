#pragma once

// Reference flows phi0^- (monotone in y) and the conditional inverse flow
//   h(y, x) = (phi0^-(y) - mu(x)) / sigma(x),  sigma(x) = exp(eta_sigma(x)).
// Every continuous flow returns its value together with the analytic
// derivative in y, built inside the same graph so that the Jacobian term of
// the log-likelihood is differentiable with respect to all parameters.

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "drift/basedist.hpp"
#include "drift/diffcore.hpp"
#include "drift/init.hpp"
#include "drift/predictors.hpp"

namespace drift {

template <class S>
struct RefValue {
  S value;
  S slope;  // d value / dy
};

template <class S>
struct HValue {
  S h;
  S dh_dy;
};

// Transformed cut-points around an ordinal level; nullopt encodes +inf
// (upper) or -inf (lower).
template <class S>
struct OrdinalBounds {
  std::optional<S> upper;
  std::optional<S> lower;
};

enum class Extrapolation { Strict, Clamp };

namespace detail {

inline double affine_scalar(double w, double u, double b) { return w * u + b; }
inline Var affine_scalar(const Var& w, double u, const Var& b) {
  return w.tape()->binary(Op::Dot, w.value() * u + b.value(), w, u, b, 1.0);
}

// (1 - z^2) * s : chain rule through tanh given z = tanh(pre).
inline double tanh_chain(double z, double s) { return (1.0 - z * z) * s; }
inline Var tanh_chain(const Var& z, const Var& s) {
  const double g = 1.0 - z.value() * z.value();
  return z.tape()->binary(Op::Custom, g * s.value(), z, -2.0 * z.value() * s.value(), s, g);
}

}  // namespace detail

// Feed-forward network 1 -> hidden... -> 1 with effective weights
// softplus(raw) + 1e-8, tanh hidden activations and a linear output layer.
// The input is standardized with fixed constants before the first layer.
class MonotoneNetFlow {
 public:
  static constexpr double kWeightFloor = 1e-8;

  explicit MonotoneNetFlow(std::vector<int> hidden = {10, 10}, double input_shift = 0.0,
                           double input_scale = 1.0);

  const std::vector<int>& hidden() const { return hidden_; }
  // 1, hidden..., 1
  const std::vector<int>& widths() const { return widths_; }
  double input_shift() const { return input_shift_; }
  double input_scale() const { return input_scale_; }
  std::size_t num_params() const { return n_params_; }
  std::size_t num_layers() const { return widths_.size() - 1; }

  template <class S>
  struct Prepared {
    std::vector<std::vector<S>> weights;  // effective, row-major out x in
    std::vector<std::vector<S>> biases;
  };

  template <class S>
  Prepared<S> prepare(std::span<const S> params) const;

  template <class S>
  RefValue<S> eval(const Prepared<S>& p, double y) const;

  // Post-activation values of every layer for one input; entry 0 holds the
  // standardized input itself.
  std::vector<std::vector<double>> activations(std::span<const double> params, double y) const;

  // Raw weights are set so that softplus(raw) + 1e-8 equals a draw from the
  // scheme's uniform law; biases start at zero.
  void init(std::span<double> params, InitScheme scheme, Rng& rng) const;

 private:
  std::vector<int> hidden_;
  std::vector<int> widths_;
  std::vector<std::size_t> offsets_;  // start of each layer's weights
  double input_shift_;
  double input_scale_;
  std::size_t n_params_ = 0;
};

class ClampCounter {
 public:
  ClampCounter() = default;
  ClampCounter(const ClampCounter& o) : n_(o.n_.load()) {}
  ClampCounter& operator=(const ClampCounter& o) {
    n_.store(o.n_.load());
    return *this;
  }
  void bump() const { n_.fetch_add(1, std::memory_order_relaxed); }
  std::uint64_t count() const { return n_.load(); }
  void reset() const { n_.store(0); }

 private:
  mutable std::atomic<std::uint64_t> n_{0};
};

// Polynomial in Bernstein form of order M on [lo, hi] with coefficients
// theta_1 = raw_1, theta_k = theta_{k-1} + softplus(raw_k).
class BernsteinFlow {
 public:
  BernsteinFlow(int order, double lo, double hi);

  int order() const { return order_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t num_params() const { return static_cast<std::size_t>(order_) + 1; }

  template <class S>
  struct Prepared {
    std::vector<S> theta;
    std::vector<S> increments;  // theta_{m+1} - theta_m
  };

  template <class S>
  Prepared<S> prepare(std::span<const S> params) const;

  // Strict: DomainError outside [lo, hi]. Clamp: y is moved to the nearest
  // boundary and the clamp counter is bumped.
  template <class S>
  RefValue<S> eval(const Prepared<S>& p, double y,
                   Extrapolation policy = Extrapolation::Strict) const;

  // Coefficients start at base quantiles of (m + 0.5) / (M + 1).
  void init(std::span<double> params, const BaseDistribution& base) const;

  // Raw parameters reproducing a given non-decreasing coefficient vector.
  static std::vector<double> raw_from_theta(std::span<const double> theta);

  const ClampCounter& clamp_counter() const { return clamped_; }

 private:
  int order_;
  double lo_;
  double hi_;
  ClampCounter clamped_;
};

// Basis values b_{m,M}(t), m = 0..M, for t in [0, 1].
std::vector<double> bernstein_basis(int order, double t);

// K-level ordinal reference: K-1 finite increasing cut-points with
// theta_1 = raw_1, theta_k = theta_{k-1} + softplus(raw_k) + 1e-8.
class OrdinalCutpoints {
 public:
  static constexpr double kGapFloor = 1e-8;

  explicit OrdinalCutpoints(int levels);

  int levels() const { return levels_; }
  std::size_t num_params() const { return static_cast<std::size_t>(levels_ - 1); }

  template <class S>
  struct Prepared {
    std::vector<S> theta;
  };

  template <class S>
  Prepared<S> prepare(std::span<const S> params) const;

  // Level k in 1..K -> (theta_k or +inf, theta_{k-1} or -inf).
  template <class S>
  OrdinalBounds<S> eval(const Prepared<S>& p, int level) const;

  // Cut-points start at base quantiles of k / K.
  void init(std::span<double> params, const BaseDistribution& base) const;

 private:
  int levels_;
};

using ReferenceFlow = std::variant<MonotoneNetFlow, BernsteinFlow, OrdinalCutpoints>;

template <class S>
using PreparedReference =
    std::variant<MonotoneNetFlow::Prepared<S>, BernsteinFlow::Prepared<S>,
                 OrdinalCutpoints::Prepared<S>>;

inline std::size_t num_params(const ReferenceFlow& f) {
  return std::visit([](const auto& r) { return r.num_params(); }, f);
}

inline bool is_continuous(const ReferenceFlow& f) {
  return !std::holds_alternative<OrdinalCutpoints>(f);
}

// Location and inverse scale at one feature row; absent predictors leave
// the corresponding optional empty (mu = 0, sigma = 1).
template <class S>
struct LocScale {
  std::optional<S> mu;
  std::optional<S> inv_sigma;
};

class ConditionalInverseFlow {
 public:
  ConditionalInverseFlow(ReferenceFlow reference, Predictor location,
                         std::optional<Predictor> scale);

  const ReferenceFlow& reference() const { return reference_; }
  const Predictor& location() const { return location_; }
  const std::optional<Predictor>& scale() const { return scale_; }
  bool continuous() const { return is_continuous(reference_); }
  std::size_t num_params() const { return n_params_; }
  std::size_t location_offset() const { return loc_offset_; }
  std::size_t scale_offset() const { return scale_offset_; }

  template <class S>
  struct Bound {
    PreparedReference<S> reference;
    std::span<const S> location;
    std::span<const S> scale;
  };

  template <class S>
  Bound<S> bind(std::span<const S> params) const;

  template <class S>
  LocScale<S> loc_scale(const Bound<S>& b, std::span<const double> x,
                        const EvalContext& ctx = {}) const;

  template <class S>
  RefValue<S> eval_ref(const Bound<S>& b, double y,
                       Extrapolation policy = Extrapolation::Strict) const;

  template <class S>
  HValue<S> eval_h(const Bound<S>& b, double y, const LocScale<S>& ls,
                   Extrapolation policy = Extrapolation::Strict) const;

  template <class S>
  HValue<S> eval_h(const Bound<S>& b, double y, std::span<const double> x,
                   Extrapolation policy = Extrapolation::Strict,
                   const EvalContext& ctx = {}) const {
    return eval_h(b, y, loc_scale(b, x, ctx), policy);
  }

  template <class S>
  OrdinalBounds<S> eval_ordinal(const Bound<S>& b, int level, const LocScale<S>& ls) const;

  // y with h(y, x) = target, by bisection. The bracket is the Bernstein
  // domain, or for monotone nets input_shift +- input_scale * 2^k for
  // k = 0..60 until the target is enclosed.
  double invert_h(std::span<const double> params, std::span<const double> x,
                  double target) const;

  std::uint64_t clamp_count() const;

 private:
  ReferenceFlow reference_;
  Predictor location_;
  std::optional<Predictor> scale_;
  std::size_t loc_offset_ = 0;
  std::size_t scale_offset_ = 0;
  std::size_t n_params_ = 0;
};

// ---------------------------------------------------------------------------
// Template definitions.

template <class S>
MonotoneNetFlow::Prepared<S> MonotoneNetFlow::prepare(std::span<const S> params) const {
  Prepared<S> p;
  p.weights.resize(num_layers());
  p.biases.resize(num_layers());
  for (std::size_t k = 0; k < num_layers(); ++k) {
    const auto in = static_cast<std::size_t>(widths_[k]);
    const auto out = static_cast<std::size_t>(widths_[k + 1]);
    p.weights[k].reserve(in * out);
    for (std::size_t i = 0; i < in * out; ++i)
      p.weights[k].push_back(softplus(params[offsets_[k] + i]) + kWeightFloor);
    p.biases[k].assign(params.begin() + static_cast<std::ptrdiff_t>(offsets_[k] + in * out),
                       params.begin() + static_cast<std::ptrdiff_t>(offsets_[k] + in * out + out));
  }
  return p;
}

template <class S>
RefValue<S> MonotoneNetFlow::eval(const Prepared<S>& p, double y) const {
  const double u = (y - input_shift_) / input_scale_;
  const double du = 1.0 / input_scale_;
  const std::size_t layers = num_layers();
  std::vector<S> z;
  std::vector<S> dz;
  const auto first_out = static_cast<std::size_t>(widths_[1]);
  z.reserve(first_out);
  dz.reserve(first_out);
  for (std::size_t j = 0; j < first_out; ++j) {
    S pre = detail::affine_scalar(p.weights[0][j], u, p.biases[0][j]);
    S s = p.weights[0][j] * du;
    if (layers == 1) return {pre, s};
    z.push_back(tanh(pre));
    dz.push_back(detail::tanh_chain(z.back(), s));
  }
  for (std::size_t k = 1; k < layers; ++k) {
    const auto in = static_cast<std::size_t>(widths_[k]);
    const auto out = static_cast<std::size_t>(widths_[k + 1]);
    const std::span<const S> w(p.weights[k]);
    if (k + 1 == layers) {
      const auto row = w.subspan(0, in);
      return {dot(row, std::span<const S>(z), &p.biases[k][0]),
              dot(row, std::span<const S>(dz))};
    }
    std::vector<S> nz;
    std::vector<S> ndz;
    nz.reserve(out);
    ndz.reserve(out);
    for (std::size_t j = 0; j < out; ++j) {
      const auto row = w.subspan(j * in, in);
      S pre = dot(row, std::span<const S>(z), &p.biases[k][j]);
      S s = dot(row, std::span<const S>(dz));
      nz.push_back(tanh(pre));
      ndz.push_back(detail::tanh_chain(nz.back(), s));
    }
    z = std::move(nz);
    dz = std::move(ndz);
  }
  throw Error("monotone net has no output layer");
}

template <class S>
BernsteinFlow::Prepared<S> BernsteinFlow::prepare(std::span<const S> params) const {
  Prepared<S> p;
  p.theta.reserve(num_params());
  p.increments.reserve(static_cast<std::size_t>(order_));
  p.theta.push_back(params[0]);
  for (std::size_t m = 1; m < num_params(); ++m) {
    p.increments.push_back(softplus(params[m]));
    p.theta.push_back(p.theta.back() + p.increments.back());
  }
  return p;
}

template <class S>
RefValue<S> BernsteinFlow::eval(const Prepared<S>& p, double y, Extrapolation policy) const {
  if (!(y >= lo_ && y <= hi_)) {
    if (policy == Extrapolation::Strict || std::isnan(y))
      throw DomainError("y outside the Bernstein domain");
    clamped_.bump();
    y = y < lo_ ? lo_ : hi_;
  }
  const double width = hi_ - lo_;
  const double t = (y - lo_) / width;
  const auto b = bernstein_basis(order_, t);
  const auto db = bernstein_basis(order_ - 1, t);
  S value = dot(std::span<const S>(p.theta), std::span<const double>(b));
  S slope = dot(std::span<const S>(p.increments), std::span<const double>(db)) *
            (static_cast<double>(order_) / width);
  return {value, slope};
}

template <class S>
OrdinalCutpoints::Prepared<S> OrdinalCutpoints::prepare(std::span<const S> params) const {
  Prepared<S> p;
  p.theta.reserve(num_params());
  if (num_params() == 0) return p;
  p.theta.push_back(params[0]);
  for (std::size_t k = 1; k < num_params(); ++k)
    p.theta.push_back(p.theta.back() + (softplus(params[k]) + kGapFloor));
  return p;
}

template <class S>
OrdinalBounds<S> OrdinalCutpoints::eval(const Prepared<S>& p, int level) const {
  if (level < 1 || level > levels_)
    throw DomainError("ordinal level " + std::to_string(level) + " outside 1.." +
                      std::to_string(levels_));
  OrdinalBounds<S> b;
  if (level < levels_) b.upper = p.theta[static_cast<std::size_t>(level - 1)];
  if (level > 1) b.lower = p.theta[static_cast<std::size_t>(level - 2)];
  return b;
}

template <class S>
ConditionalInverseFlow::Bound<S> ConditionalInverseFlow::bind(std::span<const S> params) const {
  if (params.size() != n_params_) throw Error("parameter vector has the wrong length");
  Bound<S> b{std::visit(
                 [&](const auto& r) -> PreparedReference<S> {
                   return r.template prepare<S>(params.subspan(0, r.num_params()));
                 },
                 reference_),
             params.subspan(loc_offset_, location_.num_params()),
             params.subspan(scale_offset_, scale_ ? scale_->num_params() : 0)};
  return b;
}

template <class S>
LocScale<S> ConditionalInverseFlow::loc_scale(const Bound<S>& b, std::span<const double> x,
                                              const EvalContext& ctx) const {
  LocScale<S> ls;
  if (!location_.empty()) ls.mu = location_.eval_additive(b.location, x, ctx);
  if (scale_ && !scale_->empty()) ls.inv_sigma = exp(-scale_->eval_additive(b.scale, x, ctx));
  return ls;
}

template <class S>
RefValue<S> ConditionalInverseFlow::eval_ref(const Bound<S>& b, double y,
                                             Extrapolation policy) const {
  if (const auto* net = std::get_if<MonotoneNetFlow>(&reference_))
    return net->eval(std::get<MonotoneNetFlow::Prepared<S>>(b.reference), y);
  if (const auto* bern = std::get_if<BernsteinFlow>(&reference_))
    return bern->eval(std::get<BernsteinFlow::Prepared<S>>(b.reference), y, policy);
  throw DomainError("ordinal reference flow has no continuous evaluation");
}

template <class S>
HValue<S> ConditionalInverseFlow::eval_h(const Bound<S>& b, double y, const LocScale<S>& ls,
                                         Extrapolation policy) const {
  RefValue<S> r = eval_ref(b, y, policy);
  S h = ls.mu ? r.value - *ls.mu : r.value;
  if (ls.inv_sigma) return {h * *ls.inv_sigma, r.slope * *ls.inv_sigma};
  return {h, r.slope};
}

template <class S>
OrdinalBounds<S> ConditionalInverseFlow::eval_ordinal(const Bound<S>& b, int level,
                                                      const LocScale<S>& ls) const {
  const auto* ord = std::get_if<OrdinalCutpoints>(&reference_);
  if (!ord) throw DomainError("discrete outcome requires an ordinal reference flow");
  auto bounds = ord->eval(std::get<OrdinalCutpoints::Prepared<S>>(b.reference), level);
  auto transform = [&](std::optional<S>& v) {
    if (!v) return;
    if (ls.mu) v = *v - *ls.mu;
    if (ls.inv_sigma) v = *v * *ls.inv_sigma;
  };
  transform(bounds.upper);
  transform(bounds.lower);
  return bounds;
}

}  // namespace drift
