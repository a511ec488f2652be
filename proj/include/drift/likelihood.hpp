#pragma once

// Per-observation log-likelihood contributions and the mean negative
// log-likelihood over index subsets of a dataset.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "drift/model.hpp"

namespace drift {

inline constexpr double kMassFloor = 1e-300;

namespace detail {

// log(exp(a) - exp(b)) for b < a, with the mass floored at kMassFloor.
inline double log_diff_exp(double a, double b) {
  const double v = a + std::log(-std::expm1(b - a));
  return std::isfinite(v) && v > std::log(kMassFloor) ? v : std::log(kMassFloor);
}

// Below the floor the value is clamped but the partials of the unfloored
// expression are kept, so an optimizer still sees which way the mass grows.
inline Var log_diff_exp(const Var& a, const Var& b) {
  const double r = std::exp(b.value() - a.value());
  const double one_minus = -std::expm1(b.value() - a.value());
  const double v = log_diff_exp(a.value(), b.value());
  if (!(one_minus > 0.0)) return a.tape()->binary(Op::Custom, v, a, 0.0, b, 0.0);
  return a.tape()->binary(Op::Custom, v, a, 1.0 / one_minus, b, -r / one_minus);
}

}  // namespace detail

// log f(h) + log dh/dy. Throws NonFiniteError when dh/dy <= 0.
template <class S>
S loglik_exact(const BaseDistribution& base, const HValue<S>& hv) {
  if (!(value_of(hv.dh_dy) > 0.0))
    throw NonFiniteError("non-positive flow derivative in an exact likelihood term");
  return base.log_pdf(hv.h) + log(hv.dh_dy);
}

// log(F(upper) - F(lower)) with nullopt meaning +inf (upper) or -inf (lower).
// The survival form is used once the lower bound is positive, where
// F(upper) - F(lower) would cancel.
template <class S>
S loglik_bounds(const BaseDistribution& base, const std::optional<S>& lower,
                const std::optional<S>& upper, const S& zero) {
  if (!lower && !upper) return zero;
  if (!upper) return base.log_survival(*lower);
  if (!lower) return base.log_cdf(*upper);
  if (value_of(*lower) > 0.0)
    return detail::log_diff_exp(base.log_survival(*lower), base.log_survival(*upper));
  return detail::log_diff_exp(base.log_cdf(*upper), base.log_cdf(*lower));
}

// Standardized features and outcomes of a dataset, checked against a model.
struct PreparedData {
  std::size_t n_features = 0;
  std::vector<double> x;  // row-major, standardized
  std::vector<Outcome> y;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * n_features, n_features};
  }
};

// DataError when the dataset's outcome type, level count or feature columns
// do not match the model.
void check_compatible(const DriftModel& model, const Dataset& data);
PreparedData prepare_data(const DriftModel& model, const Dataset& data);

template <class S>
S loglik(const DriftModel& model, const typename ConditionalInverseFlow::Bound<S>& bound,
         const Outcome& y, std::span<const double> x, const S& zero,
         Extrapolation policy = Extrapolation::Strict, const EvalContext& ctx = {}) {
  const auto& cif = model.flow();
  const auto& base = model.base();
  const LocScale<S> ls = cif.loc_scale(bound, x, ctx);
  if (const auto* e = std::get_if<Exact>(&y))
    return loglik_exact(base, cif.eval_h(bound, e->y, ls, policy));
  if (const auto* d = std::get_if<Discrete>(&y)) {
    const auto b = cif.eval_ordinal(bound, d->level, ls);
    return loglik_bounds(base, b.lower, b.upper, zero);
  }
  const auto& iv = std::get<Interval>(y);
  if (!(iv.lo < iv.hi)) throw EmptyInterval();
  std::optional<S> lower;
  std::optional<S> upper;
  if (std::isfinite(iv.lo)) lower = cif.eval_h(bound, iv.lo, ls, policy).h;
  if (std::isfinite(iv.hi)) upper = cif.eval_h(bound, iv.hi, ls, policy).h;
  return loglik_bounds(base, lower, upper, zero);
}

// Per-observation log-likelihoods at the given parameters.
std::vector<double> pointwise_loglik(const DriftModel& model, std::span<const double> params,
                                     const PreparedData& data,
                                     Extrapolation policy = Extrapolation::Clamp);

// Mean negative log-likelihood of `rows` recorded on `tape`; `params` must
// be param leaves of that tape.
Var nll(Tape& tape, const DriftModel& model, std::span<const Var> params,
        const PreparedData& data, std::span<const std::size_t> rows,
        const EvalContext& ctx = {}, Extrapolation policy = Extrapolation::Strict);

double nll_value(const DriftModel& model, std::span<const double> params,
                 const PreparedData& data, std::span<const std::size_t> rows,
                 Extrapolation policy = Extrapolation::Strict);

struct NllGradient {
  double value = 0.0;
  std::vector<double> gradient;
  bool finite = true;
};

NllGradient nll_and_gradient(const DriftModel& model, std::span<const double> params,
                             const PreparedData& data, std::span<const std::size_t> rows,
                             const EvalContext& ctx = {});

std::vector<std::size_t> all_rows(std::size_t n);

}  // namespace drift
