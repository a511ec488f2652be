#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "drift/outcome.hpp"

namespace drift {

struct OutcomeSpec {
  OutcomeKind kind = OutcomeKind::Continuous;
  std::string column;   // value, time or lower-bound column
  std::string column2;  // status or upper-bound column
  int levels = 0;       // ordinal only
  bool counts = false;  // ordinal read from a count column
};

// "continuous(y)", "ordinal(quality, 6)", "count(visits, 8)",
// "survival(time, status)", "interval(lo, hi)".
//
// count(col, K) is an ordinal outcome with K levels: a count c >= 0 becomes
// level min(c, K - 1) + 1, so the top level holds every count >= K - 1.
OutcomeSpec parse_outcome_spec(const std::string& text);
std::string format_outcome_spec(const OutcomeSpec& spec);

struct ColumnTransform {
  enum class Kind { Log, Log1p, SubtractMin, MonthNumber, WeekdayNumber };
  Kind kind;
  std::string column;
};

// "log(x)", "log1p(x)", "submin(x)", "month(x)" (jan..dec -> 1..12),
// "weekday(x)" (mon..sun -> 1..7).
ColumnTransform parse_transform(const std::string& text);
std::string format_transform(const ColumnTransform& t);

struct DatasetSchema {
  std::vector<std::string> features;
  OutcomeSpec outcome;
  std::vector<ColumnTransform> transforms;
  char delimiter = ',';
};

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<double> features;  // row-major, raw units
  std::vector<Outcome> outcomes;
  OutcomeKind kind = OutcomeKind::Continuous;

  std::size_t size() const { return outcomes.size(); }
  std::size_t num_features() const { return feature_names.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * num_features(), num_features()};
  }
  Dataset subset(std::span<const std::size_t> rows) const;
  void push_back(std::span<const double> x, Outcome y);
};

// Survival view of a dataset: observed time and event flag per row.
struct SurvivalData {
  std::vector<double> times;
  std::vector<int> events;
};
SurvivalData survival_view(const Dataset& data);

// RFC-4180 CSV with a header row. Throws MissingColumn or ParseError (with
// the 1-based line number of the offending record).
Dataset load_csv(const std::string& path, const DatasetSchema& schema);
Dataset read_csv(std::istream& in, const DatasetSchema& schema);

// Split one CSV record honouring quotes; exposed for the writer tests.
std::vector<std::string> split_csv_record(const std::string& record, char delimiter = ',');
std::string csv_escape(const std::string& field);

void write_dataset_csv(std::ostream& out, const Dataset& data,
                       const std::vector<std::string>& outcome_columns);

class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> means, std::vector<double> sds);

  // Means and standard deviations of the given rows; constant features get
  // sd = 1.
  static Standardizer fit(const Dataset& data);
  static Standardizer identity(std::size_t n_features);

  std::size_t size() const { return means_.size(); }
  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& sds() const { return sds_; }

  void apply(std::span<const double> raw, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> raw) const;
  std::vector<double> invert(std::span<const double> standardized) const;
  double apply(std::size_t feature, double raw) const;
  double invert(std::size_t feature, double standardized) const;

 private:
  std::vector<double> means_;
  std::vector<double> sds_;
};

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Deterministic shuffled partition into k folds whose sizes differ by at
// most one.
std::vector<Fold> kfold(std::size_t n, std::size_t k, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic generators.

namespace example2 {

// Location and scale effects; mu(0) = 0 and sigma(0) = 1.
double mu(double x);
double sigma(double x);

// Reference distribution 0.5 N(-2, 1) + 0.5 N(2, 1).
double mixture_log_pdf(double y);
double mixture_log_cdf(double y);
double mixture_log_survival(double y);
// logit of the mixture CDF: the inverse reference flow for a logistic base.
double reference_inverse(double y);
// Mixture quantile of the logistic CDF evaluated at z, by bisection.
double reference_flow(double z);

double oracle_log_density(double y, double x);
double oracle_density(double y, double x);

}  // namespace example2

// Bimodal mixture example: draws with x ~ U(x_lo, x_hi) (default U(-1, 1)).
Dataset gen_example2(std::size_t n, std::uint64_t seed, double x_lo = -1.0, double x_hi = 1.0);
double oracle_logscore(const Dataset& example2_data);

// y = 1 + 2 x + 0.5 eps, x and eps standard normal.
Dataset gen_linear_gaussian(std::size_t n, std::uint64_t seed);

// Proportional-odds ordinal data: latent 1.0 x1 - 0.5 x2 + logistic noise
// cut at (-1.5, 0, 1.5) for K = 4.
Dataset gen_ordinal(std::size_t n, std::uint64_t seed);

// Weibull proportional hazards (shape 1.5, effects 0.8 x1 - 0.5 x2) with
// exponential censoring tuned to the requested censoring fraction.
Dataset gen_survival_ph(std::size_t n, std::uint64_t seed, double censor_fraction = 0.3);

}  // namespace drift
