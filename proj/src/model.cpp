#include "drift/model.hpp"

#include <algorithm>
#include <cmath>

namespace drift {

FlowKind parse_flow_kind(std::string_view name) {
  if (name == "monotone_net") return FlowKind::MonotoneNet;
  if (name == "bernstein") return FlowKind::Bernstein;
  if (name == "ordinal") return FlowKind::Ordinal;
  throw ConfigError("unknown flow kind '" + std::string(name) +
                    "' (monotone_net | bernstein | ordinal)");
}

std::string_view to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::MonotoneNet: return "monotone_net";
    case FlowKind::Bernstein: return "bernstein";
    case FlowKind::Ordinal: return "ordinal";
  }
  return "?";
}

FlowCalibration calibrate_flow(const Dataset& data) {
  std::vector<double> v;
  v.reserve(data.size());
  for (const auto& o : data.outcomes) {
    if (const auto* e = std::get_if<Exact>(&o)) {
      v.push_back(e->y);
    } else if (const auto* iv = std::get_if<Interval>(&o)) {
      if (std::isfinite(iv->lo)) v.push_back(iv->lo);
      if (std::isfinite(iv->hi)) v.push_back(iv->hi);
    }
  }
  FlowCalibration c;
  if (v.empty()) return c;
  double mean = 0.0;
  for (double y : v) mean += y;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double y : v) var += (y - mean) * (y - mean);
  var /= static_cast<double>(v.size());
  c.shift = mean;
  c.scale = var > 0.0 ? std::sqrt(var) : 1.0;
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  const double range = *mx - *mn;
  const double pad = range > 0.0 ? 0.05 * range : 1.0;
  c.lo = *mn - pad;
  c.hi = *mx + pad;
  return c;
}

void validate_spec(const ModelSpec& spec) {
  const bool ordinal_data = spec.outcome.kind == OutcomeKind::Ordinal;
  const bool ordinal_flow = spec.flow.kind == FlowKind::Ordinal;
  if (ordinal_data != ordinal_flow)
    throw ConfigError(ordinal_flow ? "ordinal flow requires an ordinal outcome"
                                   : "ordinal outcome requires flow.kind = \"ordinal\"");
  if (ordinal_flow && spec.flow.levels != spec.outcome.levels)
    throw ConfigError("flow.levels (" + std::to_string(spec.flow.levels) +
                      ") disagrees with the outcome level count (" +
                      std::to_string(spec.outcome.levels) + ")");
}

namespace {

ReferenceFlow make_reference(const FlowSpec& f, const FlowCalibration& c) {
  switch (f.kind) {
    case FlowKind::MonotoneNet: return MonotoneNetFlow(f.hidden, c.shift, c.scale);
    case FlowKind::Bernstein: return BernsteinFlow(f.order, c.lo, c.hi);
    case FlowKind::Ordinal: return OrdinalCutpoints(f.levels);
  }
  throw ConfigError("unknown flow kind");
}

std::optional<Predictor> make_scale(const ModelSpec& s) {
  if (s.scale.empty()) return std::nullopt;
  return Predictor(s.scale, s.feature_names.size(), OutputTransform::Exp);
}

}  // namespace

DriftModel::DriftModel(ModelSpec spec, FlowCalibration calibration, Standardizer standardizer)
    : spec_(std::move(spec)),
      calibration_(calibration),
      standardizer_(std::move(standardizer)),
      base_(spec_.base),
      flow_(make_reference(spec_.flow, calibration_),
            Predictor(spec_.location, spec_.feature_names.size(), OutputTransform::Identity),
            make_scale(spec_)),
      params_(flow_.num_params(), 0.0) {
  validate_spec(spec_);
  if (standardizer_.size() != spec_.feature_names.size())
    throw ConfigError("standardizer covers " + std::to_string(standardizer_.size()) +
                      " features, model has " + std::to_string(spec_.feature_names.size()));
}

void DriftModel::set_params(std::vector<double> p) {
  if (p.size() != num_params())
    throw ConfigError("parameter vector has " + std::to_string(p.size()) + " entries, model needs " +
                      std::to_string(num_params()));
  for (double v : p)
    if (!std::isfinite(v)) throw NonFiniteError("non-finite model parameter");
  params_ = std::move(p);
}

}  // namespace drift
