#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drift/init.hpp"
#include "drift/likelihood.hpp"
#include "drift/model.hpp"

namespace drift {

struct TrainConfig {
  double learning_rate = 1e-3;
  double decay = 0.0;  // lr_t = lr / (1 + decay * t), t = completed Adam steps
  int epochs = 200;
  std::size_t batch_size = 32;
  double validation_fraction = 0.1;
  int patience = 15;
  std::uint64_t seed = 1;
  InitScheme init = InitScheme::MaxFanPositive;
  double clip_norm = 10.0;  // <= 0 disables clipping

  // ConfigError on out-of-range values.
  void validate() const;
};

struct FitReport {
  std::vector<double> train_nll;  // mean minibatch NLL of each epoch
  std::vector<double> val_nll;    // empty without a validation split
  int best_epoch = 0;             // 1-based
  int epochs_run = 0;
  std::string stop_reason;        // "max_epochs" | "early_stopping"
  double seconds = 0.0;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
};

// Standardizer and flow calibration from `data`, then parameters drawn per
// scheme: positive layers of monotone nets from the scheme's law, Bernstein
// and ordinal coefficients at base quantiles, predictor networks Glorot.
DriftModel init_model(const ModelSpec& spec, const Dataset& data, InitScheme scheme,
                      std::uint64_t seed);

// Draws fresh parameters for an existing model (same calibration).
void init_params(DriftModel& model, InitScheme scheme, std::uint64_t seed);

class Adam {
 public:
  explicit Adam(std::size_t n, double learning_rate, double decay = 0.0, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);

  void step(std::span<double> params, std::span<const double> grad);
  std::uint64_t steps() const { return t_; }

 private:
  double lr_;
  double decay_;
  double beta1_;
  double beta2_;
  double eps_;
  std::uint64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

// Scales `grad` in place to global norm `max_norm`; returns the norm before
// scaling.
double clip_global_norm(std::span<double> grad, double max_norm);

// Adam on the mean NLL over shuffled minibatches. The validation rows are a
// seeded random subset; with patience exhausted, or at the end, the
// parameters of the best validation epoch are restored. Throws
// DivergenceError on a non-finite loss or gradient.
FitReport fit(DriftModel& model, const Dataset& data, const TrainConfig& cfg);

struct LayerSummary {
  int width = 0;
  std::vector<double> quantiles;  // at kProbeLevels, pooled over units
  double saturated = 0.0;         // fraction with |a| > 0.999
};

inline const std::vector<double> kProbeLevels = {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99};

// Activations of a freshly initialized monotone net fed `n` standard-normal
// inputs. Entry 0 summarizes the inputs, entry k the output of layer k.
std::vector<LayerSummary> saturation_probe(const std::vector<int>& hidden, InitScheme scheme,
                                           std::size_t n = 10000, std::uint64_t seed = 1);

}  // namespace drift
