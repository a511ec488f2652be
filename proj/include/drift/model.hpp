#pragma once

// A DRIFT model: base distribution, reference flow, location/scale
// predictors, the feature standardizer and a flat parameter vector.

#include <optional>
#include <string>
#include <vector>

#include "drift/basedist.hpp"
#include "drift/dataio.hpp"
#include "drift/flows.hpp"
#include "drift/predictors.hpp"

namespace drift {

enum class FlowKind { MonotoneNet, Bernstein, Ordinal };

// "monotone_net", "bernstein", "ordinal"
FlowKind parse_flow_kind(std::string_view name);
std::string_view to_string(FlowKind kind);

struct FlowSpec {
  FlowKind kind = FlowKind::MonotoneNet;
  std::vector<int> hidden = {10, 10};  // monotone_net
  int order = 30;                      // bernstein
  int levels = 0;                      // ordinal
};

struct ModelSpec {
  BaseKind base = BaseKind::Logistic;
  FlowSpec flow;
  std::vector<TermSpec> location;
  std::vector<TermSpec> scale;  // empty: sigma = 1
  std::vector<std::string> feature_names;
  OutcomeSpec outcome;
};

// Data-dependent constants of the reference flow, fixed before training:
// input standardization for monotone nets, the domain for Bernstein flows.
struct FlowCalibration {
  double shift = 0.0;
  double scale = 1.0;
  double lo = 0.0;
  double hi = 1.0;
};

// Mean/sd of the finite outcome values (or interval endpoints) and their
// range widened by 5% on each side.
FlowCalibration calibrate_flow(const Dataset& data);

// Rejects flow/outcome combinations that have no likelihood, e.g. an ordinal
// flow without a level count or a continuous flow for ordinal data.
void validate_spec(const ModelSpec& spec);

class DriftModel {
 public:
  DriftModel(ModelSpec spec, FlowCalibration calibration, Standardizer standardizer);

  const ModelSpec& spec() const { return spec_; }
  const FlowCalibration& calibration() const { return calibration_; }
  const Standardizer& standardizer() const { return standardizer_; }
  const BaseDistribution& base() const { return base_; }
  const ConditionalInverseFlow& flow() const { return flow_; }
  std::size_t num_params() const { return flow_.num_params(); }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  void set_params(std::vector<double> p);

  std::vector<double> standardize(std::span<const double> raw_x) const {
    return standardizer_.apply(raw_x);
  }

 private:
  ModelSpec spec_;
  FlowCalibration calibration_;
  Standardizer standardizer_;
  BaseDistribution base_;
  ConditionalInverseFlow flow_;
  std::vector<double> params_;
};

}  // namespace drift
