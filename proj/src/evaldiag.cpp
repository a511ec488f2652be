#include "drift/evaldiag.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drift/likelihood.hpp"

namespace drift {

namespace {

double quantile_type7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

int as_level(const DriftModel& model, double g) {
  const int k = static_cast<int>(std::lround(g));
  if (static_cast<double>(k) != g || k < 1 || k > model.spec().flow.levels)
    throw DomainError("ordinal grid values must be levels 1.." +
                      std::to_string(model.spec().flow.levels));
  return k;
}

}  // namespace

std::vector<double> default_grid(const DriftModel& model, std::size_t n) {
  std::vector<double> g;
  if (!model.flow().continuous()) {
    for (int k = 1; k <= model.spec().flow.levels; ++k) g.push_back(k);
    return g;
  }
  if (n < 2) throw DomainError("grid needs at least two points");
  const auto& c = model.calibration();
  g.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = c.lo + (c.hi - c.lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

std::vector<double> predict_cdf(const DriftModel& model, std::span<const double> x,
                                std::span<const double> grid) {
  const auto xz = model.standardize(x);
  const auto& cif = model.flow();
  const auto bound = cif.bind<double>(model.params());
  const auto ls = cif.loc_scale(bound, xz);
  std::vector<double> out;
  out.reserve(grid.size());
  for (double y : grid) {
    if (cif.continuous()) {
      out.push_back(model.base().cdf(cif.eval_h(bound, y, ls, Extrapolation::Clamp).h));
    } else {
      const auto b = cif.eval_ordinal(bound, as_level(model, y), ls);
      out.push_back(b.upper ? model.base().cdf(*b.upper) : 1.0);
    }
  }
  return out;
}

std::vector<double> predict_density(const DriftModel& model, std::span<const double> x,
                                    std::span<const double> grid) {
  const auto xz = model.standardize(x);
  const auto& cif = model.flow();
  const auto bound = cif.bind<double>(model.params());
  const auto ls = cif.loc_scale(bound, xz);
  std::vector<double> out;
  out.reserve(grid.size());
  for (double y : grid) {
    if (cif.continuous()) {
      out.push_back(std::exp(loglik_exact(model.base(), cif.eval_h(bound, y, ls, Extrapolation::Clamp))));
    } else {
      const auto b = cif.eval_ordinal(bound, as_level(model, y), ls);
      out.push_back(std::exp(loglik_bounds<double>(model.base(), b.lower, b.upper, 0.0)));
    }
  }
  return out;
}

std::vector<double> predict_quantile(const DriftModel& model, std::span<const double> x,
                                     std::span<const double> qs) {
  for (double q : qs)
    if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile levels must lie in (0, 1)");
  std::vector<double> out;
  out.reserve(qs.size());
  const auto& cif = model.flow();
  if (!cif.continuous()) {
    const auto levels = default_grid(model);
    const auto cdf = predict_cdf(model, x, levels);
    for (double q : qs) {
      std::size_t k = 0;
      while (k + 1 < cdf.size() && cdf[k] < q) ++k;
      out.push_back(levels[k]);
    }
    return out;
  }
  const auto xz = model.standardize(x);
  const auto* bern = std::get_if<BernsteinFlow>(&cif.reference());
  for (double q : qs) {
    const double target = model.base().quantile(q);
    try {
      out.push_back(cif.invert_h(model.params(), xz, target));
    } catch (const BracketError&) {
      // Bernstein flows put the mass beyond their domain on the boundary.
      if (!bern) throw;
      const auto bound = cif.bind<double>(model.params());
      out.push_back(cif.eval_h(bound, bern->lo(), xz).h > target ? bern->lo() : bern->hi());
    }
  }
  return out;
}

double log_score(const DriftModel& model, const Dataset& data) {
  if (data.size() == 0) throw DataError("log-score of an empty dataset");
  const auto prepared = prepare_data(model, data);
  const auto ll = pointwise_loglik(model, model.params(), prepared, Extrapolation::Clamp);
  return std::accumulate(ll.begin(), ll.end(), 0.0) / static_cast<double>(ll.size());
}

ScoreReport summarize_scores(std::vector<double> per_fold) {
  if (per_fold.empty()) throw DataError("no fold scores to summarize");
  ScoreReport r;
  const double n = static_cast<double>(per_fold.size());
  r.mean = std::accumulate(per_fold.begin(), per_fold.end(), 0.0) / n;
  if (per_fold.size() > 1) {
    double ss = 0.0;
    for (double v : per_fold) ss += (v - r.mean) * (v - r.mean);
    r.sd = std::sqrt(ss / (n - 1.0));
  }
  r.per_fold = std::move(per_fold);
  return r;
}

double StepSurvivalCurve::at(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 1.0;
  return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

double StepSurvivalCurve::before(double t) const {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 1.0;
  return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

StepSurvivalCurve kaplan_meier(std::span<const double> times, std::span<const int> events) {
  if (times.empty()) throw DataError("Kaplan-Meier estimate of an empty sample");
  if (times.size() != events.size()) throw DataError("times and events differ in length");
  std::vector<std::size_t> idx(times.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return times[a] < times[b]; });
  for (double t : times)
    if (!(t >= 0.0) || !std::isfinite(t)) throw DataError("survival times must be finite and >= 0");

  StepSurvivalCurve c;
  double s = 1.0;
  std::size_t at_risk = times.size();
  for (std::size_t i = 0; i < idx.size();) {
    const double t = times[idx[i]];
    std::size_t deaths = 0;
    std::size_t tied = 0;
    while (i + tied < idx.size() && times[idx[i + tied]] == t) {
      if (events[idx[i + tied]] != 0) ++deaths;
      ++tied;
    }
    if (deaths > 0) {
      s *= static_cast<double>(at_risk - deaths) / static_cast<double>(at_risk);
      c.times.push_back(t);
      c.values.push_back(s);
    }
    at_risk -= tied;
    i += tied;
  }
  return c;
}

StepSurvivalCurve censoring_survival(const SurvivalData& data) {
  std::vector<int> flipped(data.events.size());
  for (std::size_t i = 0; i < flipped.size(); ++i) flipped[i] = data.events[i] ? 0 : 1;
  return kaplan_meier(data.times, flipped);
}

std::vector<double> follow_up_quartiles(const SurvivalData& data) {
  if (data.times.empty()) throw DataError("follow-up quartiles of an empty sample");
  return {quantile_type7(data.times, 0.25), quantile_type7(data.times, 0.5),
          quantile_type7(data.times, 0.75)};
}

std::vector<std::vector<double>> predict_survival_matrix(const DriftModel& model,
                                                         const Dataset& data,
                                                         std::span<const double> times) {
  const auto& cif = model.flow();
  if (!cif.continuous()) throw DataError("survival prediction requires a continuous flow");
  const auto bound = cif.bind<double>(model.params());
  std::vector<std::vector<double>> out(data.size(), std::vector<double>(times.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto ls = cif.loc_scale(bound, model.standardize(data.row(i)));
    for (std::size_t j = 0; j < times.size(); ++j)
      out[i][j] =
          std::exp(model.base().log_survival(cif.eval_h(bound, times[j], ls, Extrapolation::Clamp).h));
  }
  return out;
}

BrierScores brier_ipcw(const std::vector<std::vector<double>>& survival,
                       const SurvivalData& data, std::span<const double> times,
                       const StepSurvivalCurve& censoring) {
  const std::size_t n = data.times.size();
  if (n == 0) throw DataError("Brier score of an empty sample");
  if (survival.size() != n) throw DataError("survival matrix has the wrong number of rows");
  BrierScores r;
  r.times.assign(times.begin(), times.end());
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double t = times[j];
    const double g_t = censoring.at(t);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = survival[i][j];
      const double ti = data.times[i];
      if (ti <= t && data.events[i]) {
        const double w = censoring.before(ti);
        if (w > 0.0) total += s * s / w;
        else ++r.excluded;
      } else if (ti > t) {
        if (g_t > 0.0) total += (1.0 - s) * (1.0 - s) / g_t;
        else ++r.excluded;
      }
    }
    r.scores.push_back(total / static_cast<double>(n));
  }
  return r;
}

IbsComparison compare_ibs(const DriftModel& model, const Dataset& reference, const Dataset& test) {
  const auto ref = survival_view(reference);
  const auto tst = survival_view(test);
  const auto km = kaplan_meier(ref.times, ref.events);
  const auto g = censoring_survival(tst);
  IbsComparison c;
  c.taus = follow_up_quartiles(tst);
  auto model_at = [&](std::span<const double> grid) {
    return predict_survival_matrix(model, test, grid);
  };
  auto km_at = [&](std::span<const double> grid) {
    std::vector<double> row(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) row[j] = km.at(grid[j]);
    return std::vector<std::vector<double>>(test.size(), row);
  };
  for (double tau : c.taus) {
    c.model.push_back(integrated_brier(model_at, tst, tau, g));
    c.kaplan_meier.push_back(integrated_brier(km_at, tst, tau, g));
  }
  return c;
}

MartingaleResiduals martingale_residuals(const DriftModel& model, const Dataset& data) {
  const auto sv = survival_view(data);
  const auto& cif = model.flow();
  if (!cif.continuous()) throw DataError("martingale residuals require a continuous flow");
  const auto bound = cif.bind<double>(model.params());
  MartingaleResiduals m;
  double total = 0.0;
  std::size_t finite = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto ls = cif.loc_scale(bound, model.standardize(data.row(i)));
    const double log_s =
        model.base().log_survival(cif.eval_h(bound, sv.times[i], ls, Extrapolation::Clamp).h);
    const double r = static_cast<double>(sv.events[i]) + log_s;
    m.residuals.push_back(r);
    if (std::isfinite(r)) {
      total += r;
      ++finite;
    } else {
      ++m.flagged;
    }
  }
  m.mean_finite = finite ? total / static_cast<double>(finite) : 0.0;
  return m;
}

}  // namespace drift
