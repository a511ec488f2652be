#include "drift/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "drift/likelihood.hpp"
#include "drift/init.hpp"

namespace drift {

GradCheckResult gradient_check(const DriftModel& model, const Dataset& data, double abs_threshold,
                               std::size_t max_params, std::uint64_t seed) {
  const auto prepared = prepare_data(model, data);
  const auto rows = all_rows(data.size());
  const auto& p = model.params();
  const auto g = nll_and_gradient(model, p, prepared, rows);
  if (!g.finite) throw NonFiniteError("gradient check: non-finite loss at the current parameters");
  GradCheckResult r;
  std::vector<std::size_t> which(p.size());
  std::iota(which.begin(), which.end(), std::size_t{0});
  if (which.size() > max_params) {
    Rng rng(seed);
    std::shuffle(which.begin(), which.end(), rng);
    which.resize(max_params);
    std::sort(which.begin(), which.end());
  }
  auto q = p;
  for (std::size_t k : which) {
    const double h = 1e-6 * std::max(1.0, std::abs(p[k]));
    q[k] = p[k] + h;
    const double fp = nll_value(model, q, prepared, rows);
    q[k] = p[k] - h;
    const double fm = nll_value(model, q, prepared, rows);
    q[k] = p[k];
    const double fd = (fp - fm) / (2.0 * h);
    const double diff = std::abs(fd - g.gradient[k]);
    const double scale = std::max(std::abs(fd), std::abs(g.gradient[k]));
    if (scale < abs_threshold)
      r.max_absolute = std::max(r.max_absolute, diff);
    else
      r.max_relative = std::max(r.max_relative, diff / scale);
    ++r.checked;
  }
  return r;
}

Dataset synthetic_data(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Dataset d;
  d.feature_names = spec.feature_names;
  d.kind = spec.outcome.kind;
  std::vector<double> x(spec.feature_names.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (auto& v : x) v = normal(rng);
    const double signal = x.empty() ? 0.0 : 0.5 * x[0];
    const double y = signal + normal(rng);
    Outcome o = Exact{y};
    switch (spec.outcome.kind) {
      case OutcomeKind::Continuous: break;
      case OutcomeKind::Ordinal: {
        const int k = std::max(2, spec.outcome.levels);
        o = Discrete{1 + static_cast<int>(r % static_cast<std::size_t>(k))};
        break;
      }
      case OutcomeKind::Survival:
        o = survival_outcome(std::exp(0.5 * y), u01(rng) < 0.7);
        break;
      case OutcomeKind::Interval:
        switch (r % 4) {
          case 0: break;
          case 1: o = Interval{y, kInf}; break;
          case 2: o = Interval{-kInf, y}; break;
          default: o = Interval{y - 0.4, y + 0.3}; break;
        }
        break;
    }
    d.push_back(x, o);
  }
  return d;
}

}  // namespace drift
