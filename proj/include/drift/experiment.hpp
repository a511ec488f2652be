#pragma once

// Cross-validated refits shared by the CLI and the benchmark harness.

#include <cstdint>
#include <optional>
#include <vector>

#include "drift/config.hpp"
#include "drift/evaldiag.hpp"
#include "drift/training.hpp"

namespace drift {

struct FoldResult {
  std::size_t fold = 0;
  std::size_t n_test = 0;
  double log_score = 0.0;
  std::optional<IbsComparison> ibs;  // survival outcomes only
  FitReport report;
};

// DRIFT_THREADS when set to a positive integer, otherwise the hardware
// concurrency (at least 1).
std::size_t worker_threads();

// Fits `cfg` on each training split of a k-fold partition and scores the
// held-out fold. Folds run on up to `threads` workers; results are ordered by
// fold index and the first failure (by fold index) is rethrown.
std::vector<FoldResult> cross_validate(const RunConfig& cfg, const Dataset& data, std::size_t k,
                                       std::uint64_t fold_seed, std::size_t threads);

}  // namespace drift
