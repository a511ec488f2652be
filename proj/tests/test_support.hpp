#pragma once

// Small models with closed-form likelihoods shared by the unit tests.

#include <optional>
#include <string>
#include <vector>

#include "drift/model.hpp"

namespace drift::testing {

inline constexpr double kIdLo = -50.0;
inline constexpr double kIdHi = 50.0;

// Bernstein order 1 with theta = (lo, hi) on [lo, hi], so phi0^-(y) = y;
// location is an intercept mu and, when given, scale an intercept log sigma.
inline DriftModel identity_model(BaseKind base, double mu, std::optional<double> log_sigma = {},
                                 OutcomeSpec outcome = {OutcomeKind::Continuous, "y", "", 0}) {
  ModelSpec s;
  s.base = base;
  s.feature_names = {"x"};
  s.outcome = outcome;
  s.flow.kind = FlowKind::Bernstein;
  s.flow.order = 1;
  s.location = parse_terms(std::vector<std::string>{"intercept"}, s.feature_names);
  if (log_sigma) s.scale = parse_terms(std::vector<std::string>{"intercept"}, s.feature_names);
  DriftModel m(s, FlowCalibration{0.0, 1.0, kIdLo, kIdHi}, Standardizer::identity(1));
  auto p = BernsteinFlow::raw_from_theta(std::vector<double>{kIdLo, kIdHi});
  p.push_back(mu);
  if (log_sigma) p.push_back(*log_sigma);
  m.set_params(p);
  return m;
}

// K-level ordinal model with the given cut-points and location intercept.
inline DriftModel ordinal_model(std::vector<double> cuts, double mu) {
  ModelSpec s;
  s.base = BaseKind::Logistic;
  s.feature_names = {"x"};
  const int k = static_cast<int>(cuts.size()) + 1;
  s.outcome = {OutcomeKind::Ordinal, "y", "", k};
  s.flow.kind = FlowKind::Ordinal;
  s.flow.levels = k;
  s.location = parse_terms(std::vector<std::string>{"intercept"}, s.feature_names);
  DriftModel m(s, FlowCalibration{}, Standardizer::identity(1));
  std::vector<double> p = {cuts[0]};
  for (std::size_t i = 1; i < cuts.size(); ++i) p.push_back(softplus_inv(cuts[i] - cuts[i - 1] - 1e-8));
  p.push_back(mu);
  m.set_params(p);
  return m;
}

inline Dataset one_row(Outcome y, double x = 0.0, OutcomeKind kind = OutcomeKind::Continuous) {
  Dataset d;
  d.feature_names = {"x"};
  d.kind = kind;
  d.push_back(std::vector<double>{x}, y);
  return d;
}

}  // namespace drift::testing
