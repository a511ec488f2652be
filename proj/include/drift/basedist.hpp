#pragma once

#include <string>
#include <string_view>

#include "drift/diffcore.hpp"

namespace drift {

enum class BaseKind { Logistic, Normal, MinExtremeValue };

// Config names: "logistic", "normal", "minimum_extreme_value".
BaseKind parse_base_kind(std::string_view name);
std::string_view to_string(BaseKind kind);

// Parameter-free latent distribution F. Every function exists for doubles
// and for Vars; the Var versions record a single node whose local partial
// is the analytic derivative.
class BaseDistribution {
 public:
  explicit BaseDistribution(BaseKind kind = BaseKind::Logistic) : kind_(kind) {}

  BaseKind kind() const { return kind_; }

  double cdf(double z) const;
  double log_pdf(double z) const;
  double log_cdf(double z) const;
  // log(1 - F(z)), evaluated without forming 1 - F(z).
  double log_survival(double z) const;
  double quantile(double p) const;

  // d/dz log f(z)
  double dlog_pdf(double z) const;
  double pdf(double z) const;

  Var cdf(const Var& z) const;
  Var log_pdf(const Var& z) const;
  Var log_cdf(const Var& z) const;
  Var log_survival(const Var& z) const;

 private:
  BaseKind kind_;
};

// Standard normal helpers shared with the synthetic generators.
double normal_cdf(double z);
double normal_log_cdf(double z);
double normal_quantile(double p);

}  // namespace drift
