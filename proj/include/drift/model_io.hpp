#pragma once

// Versioned JSON model files. Layout (format "drift-model", version 1):
//   spec          base, flow {kind, hidden, order, levels}, location and
//                 scale term strings, features, outcome
//   transforms    column transforms applied when loading data
//   training      the TrainConfig used for the fit (refits reuse it)
//   calibration   {shift, scale, lo, hi} of the reference flow
//   standardizer  {means, sds}
//   params        flat parameter array in flow/location/scale order
//   report        FitReport without wall-clock time, or null

#include <optional>
#include <string>

#include "drift/config.hpp"
#include "drift/model.hpp"
#include "drift/training.hpp"

namespace drift {

inline constexpr int kModelFormatVersion = 1;

struct SavedModel {
  DriftModel model;
  DatasetSchema schema;
  TrainConfig train;
  std::optional<FitReport> report;
};

std::string model_to_json(const SavedModel& m);
SavedModel model_from_json(const std::string& text);

void save_model(const std::string& path, const SavedModel& m);
// ConfigError for unreadable, malformed or wrong-version files.
SavedModel load_model(const std::string& path);

// FitReport as JSON, including wall-clock seconds.
std::string report_to_json(const FitReport& r);

}  // namespace drift
