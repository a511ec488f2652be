#pragma once

// Prediction surfaces, log-scores and survival diagnostics for fitted models.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "drift/dataio.hpp"
#include "drift/model.hpp"

namespace drift {

inline constexpr std::size_t kDefaultGridSize = 512;

// Equispaced grid over the calibrated outcome range of a continuous model,
// or the levels 1..K of an ordinal one.
std::vector<double> default_grid(const DriftModel& model, std::size_t n = kDefaultGridSize);

// Features are in raw units; the model standardizes them. Continuous grids
// outside a Bernstein domain are clamped. For ordinal models the grid holds
// levels: cdf is P(Y <= k) and density the probability mass of k.
std::vector<double> predict_cdf(const DriftModel& model, std::span<const double> x,
                                std::span<const double> grid);
std::vector<double> predict_density(const DriftModel& model, std::span<const double> x,
                                    std::span<const double> grid);
// Solves F(h(y, x)) = q; ordinal models return the smallest level whose
// cumulative probability reaches q.
std::vector<double> predict_quantile(const DriftModel& model, std::span<const double> x,
                                     std::span<const double> qs);

// Mean per-observation log-likelihood (higher is better).
double log_score(const DriftModel& model, const Dataset& data);

struct ScoreReport {
  double mean = 0.0;
  std::optional<double> sd;  // sample sd across folds; absent for one fold
  std::vector<double> per_fold;
};

ScoreReport summarize_scores(std::vector<double> per_fold);

// Right-continuous step function S(t) = values[j] for times[j] <= t <
// times[j+1], S(t) = 1 before the first time.
struct StepSurvivalCurve {
  std::vector<double> times;
  std::vector<double> values;

  double at(double t) const;
  // S(t-), the limit from the left.
  double before(double t) const;
};

// Product-limit estimator. At tied times events are counted before
// censorings, so subjects censored at t are still at risk at t.
StepSurvivalCurve kaplan_meier(std::span<const double> times, std::span<const int> events);

// Kaplan-Meier estimate of the censoring distribution G.
StepSurvivalCurve censoring_survival(const SurvivalData& data);

// Follow-up time quantiles (25th, 50th, 75th percentile) of the pooled
// observed times.
std::vector<double> follow_up_quartiles(const SurvivalData& data);

// survival[i][j] = S(times[j] | x_i) under a fitted model.
std::vector<std::vector<double>> predict_survival_matrix(const DriftModel& model,
                                                         const Dataset& data,
                                                         std::span<const double> times);

struct BrierScores {
  std::vector<double> times;
  std::vector<double> scores;
  std::size_t excluded = 0;  // (row, time) pairs dropped for a zero censoring weight
};

// Graf-style inverse-probability-of-censoring weighted Brier score:
//   BS(t) = 1/n sum_i [ S_i(t)^2 1{T_i <= t, d_i = 1} / G(T_i-)
//                       + (1 - S_i(t))^2 1{T_i > t} / G(t) ].
BrierScores brier_ipcw(const std::vector<std::vector<double>>& survival,
                       const SurvivalData& data, std::span<const double> times,
                       const StepSurvivalCurve& censoring);

// (1/tau) * integral of BS over [0, tau] by the trapezoidal rule on an
// `n_grid`-point grid. `survival_at(grid)` returns the survival matrix on
// that grid.
template <class SurvivalAt>
double integrated_brier(SurvivalAt&& survival_at, const SurvivalData& data, double tau,
                        const StepSurvivalCurve& censoring, std::size_t n_grid = 100) {
  if (!(tau > 0.0)) throw DomainError("integrated Brier score needs tau > 0");
  std::vector<double> grid(n_grid);
  for (std::size_t k = 0; k < n_grid; ++k)
    grid[k] = tau * static_cast<double>(k) / static_cast<double>(n_grid - 1);
  const auto bs = brier_ipcw(survival_at(std::span<const double>(grid)), data, grid, censoring);
  double area = 0.0;
  for (std::size_t k = 1; k < n_grid; ++k)
    area += 0.5 * (bs.scores[k] + bs.scores[k - 1]) * (grid[k] - grid[k - 1]);
  return area / tau;
}

// IBS of the model and of a Kaplan-Meier baseline fitted on `reference`
// (usually the training data) at each follow-up quartile of `test`.
struct IbsComparison {
  std::vector<double> taus;
  std::vector<double> model;
  std::vector<double> kaplan_meier;
};
IbsComparison compare_ibs(const DriftModel& model, const Dataset& reference, const Dataset& test);

struct MartingaleResiduals {
  std::vector<double> residuals;  // delta_i + log S(t_i | x_i)
  std::size_t flagged = 0;        // S = 0, residual -inf
  double mean_finite = 0.0;
};

MartingaleResiduals martingale_residuals(const DriftModel& model, const Dataset& data);

}  // namespace drift
