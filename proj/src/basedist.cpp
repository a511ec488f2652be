#include "drift/basedist.hpp"

#include <cmath>
#include <numbers>

namespace drift {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Lower-tail rational approximation of the standard normal quantile
// (P. J. Acklam), relative error about 1e-9 before refinement.
double acklam_lower(double p) {
  constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                          -2.759285104469687e+02, 1.383577518672690e+02,
                          -3.066479806614716e+01, 2.506628277459239e+00};
  constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                          -1.556989798598866e+02, 6.680131188771972e+01,
                          -1.328068155288572e+01};
  constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                          -2.400758277161838e+00, -2.549732539343734e+00,
                          4.374664141464968e+00,  2.938163982698783e+00};
  constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                          2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

void require_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile requires p in (0,1)");
}

}  // namespace

BaseKind parse_base_kind(std::string_view name) {
  if (name == "logistic") return BaseKind::Logistic;
  if (name == "normal") return BaseKind::Normal;
  if (name == "minimum_extreme_value") return BaseKind::MinExtremeValue;
  throw ConfigError("unknown base distribution '" + std::string(name) +
                    "' (expected logistic, normal or minimum_extreme_value)");
}

std::string_view to_string(BaseKind kind) {
  switch (kind) {
    case BaseKind::Logistic: return "logistic";
    case BaseKind::Normal: return "normal";
    case BaseKind::MinExtremeValue: return "minimum_extreme_value";
  }
  return "?";
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_log_cdf(double z) {
  if (z > 5.0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
  if (z > -37.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  // Mills-ratio asymptotics once erfc underflows.
  // Series sum_k (-1)^k (2k-1)!! / z^(2k); the 7th term is below 1e-15 here.
  const double z2 = z * z;
  double term = 1.0;
  double series = 0.0;
  for (int k = 1; k <= 6; ++k) {
    term *= -(2.0 * k - 1.0) / z2;
    series += term;
  }
  return -0.5 * z2 - kLogSqrt2Pi - std::log(-z) + std::log1p(series);
}

double normal_quantile(double p) {
  require_probability(p);
  if (p > 0.5) return -normal_quantile(1.0 - p);
  double x = acklam_lower(p);
  // One Newton step on Phi(x) - p.
  const double pdf = std::exp(-0.5 * x * x - kLogSqrt2Pi);
  if (pdf > 0.0) x -= (normal_cdf(x) - p) / pdf;
  return x;
}

double BaseDistribution::cdf(double z) const {
  switch (kind_) {
    case BaseKind::Logistic: return sigmoid(z);
    case BaseKind::Normal: return normal_cdf(z);
    case BaseKind::MinExtremeValue: return -std::expm1(-std::exp(z));
  }
  return 0.0;
}

double BaseDistribution::log_pdf(double z) const {
  switch (kind_) {
    case BaseKind::Logistic: return z - 2.0 * softplus(z);
    case BaseKind::Normal: return -0.5 * z * z - kLogSqrt2Pi;
    case BaseKind::MinExtremeValue: return z - std::exp(z);
  }
  return 0.0;
}

double BaseDistribution::pdf(double z) const { return std::exp(log_pdf(z)); }

double BaseDistribution::dlog_pdf(double z) const {
  switch (kind_) {
    case BaseKind::Logistic: return 1.0 - 2.0 * sigmoid(z);
    case BaseKind::Normal: return -z;
    case BaseKind::MinExtremeValue: return 1.0 - std::exp(z);
  }
  return 0.0;
}

double BaseDistribution::log_cdf(double z) const {
  switch (kind_) {
    case BaseKind::Logistic: return -softplus(-z);
    case BaseKind::Normal: return normal_log_cdf(z);
    case BaseKind::MinExtremeValue: {
      const double ez = std::exp(z);
      if (z < -30.0) return z - 0.5 * ez;
      return std::log(-std::expm1(-ez));
    }
  }
  return 0.0;
}

double BaseDistribution::log_survival(double z) const {
  switch (kind_) {
    case BaseKind::Logistic: return -softplus(z);
    case BaseKind::Normal: return normal_log_cdf(-z);
    case BaseKind::MinExtremeValue: return -std::exp(z);
  }
  return 0.0;
}

double BaseDistribution::quantile(double p) const {
  require_probability(p);
  switch (kind_) {
    case BaseKind::Logistic: return std::log(p) - std::log1p(-p);
    case BaseKind::Normal: return normal_quantile(p);
    case BaseKind::MinExtremeValue: return std::log(-std::log1p(-p));
  }
  return 0.0;
}

Var BaseDistribution::cdf(const Var& z) const {
  return z.tape()->unary(Op::Custom, cdf(z.value()), z, pdf(z.value()));
}

Var BaseDistribution::log_pdf(const Var& z) const {
  return z.tape()->unary(Op::Custom, log_pdf(z.value()), z, dlog_pdf(z.value()));
}

Var BaseDistribution::log_cdf(const Var& z) const {
  const double lc = log_cdf(z.value());
  return z.tape()->unary(Op::Custom, lc, z, std::exp(log_pdf(z.value()) - lc));
}

Var BaseDistribution::log_survival(const Var& z) const {
  const double ls = log_survival(z.value());
  return z.tape()->unary(Op::Custom, ls, z, -std::exp(log_pdf(z.value()) - ls));
}

}  // namespace drift
