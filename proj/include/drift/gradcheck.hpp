#pragma once

// Finite-difference check of the backward gradient of the mean NLL.

#include <cstddef>
#include <cstdint>

#include "drift/dataio.hpp"
#include "drift/model.hpp"

namespace drift {

struct GradCheckResult {
  double max_relative = 0.0;  // over partials with max(|fd|, |g|) >= abs_threshold
  double max_absolute = 0.0;  // over the remaining near-zero partials
  std::size_t checked = 0;
};

// Central differences with step 1e-6 * max(1, |p_k|) at the model's current
// parameters. Models with more than `max_params` parameters are checked on a
// random subset of that size drawn with `seed`.
GradCheckResult gradient_check(const DriftModel& model, const Dataset& data,
                               double abs_threshold = 1e-3,
                               std::size_t max_params = static_cast<std::size_t>(-1),
                               std::uint64_t seed = 1);

// Random rows matching `spec`: standard-normal features and an outcome of
// the model's outcome kind (mixed censoring patterns for interval outcomes).
Dataset synthetic_data(const ModelSpec& spec, std::size_t n, std::uint64_t seed);

}  // namespace drift
