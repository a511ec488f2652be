#include <doctest.h>

#include <cmath>
#include <vector>

#include "drift/evaldiag.hpp"
#include "test_support.hpp"

using namespace drift;
using namespace drift::testing;
using doctest::Approx;

TEST_CASE("Kaplan-Meier hand example") {
  const std::vector<double> t = {1, 2, 3};
  const std::vector<int> e = {1, 0, 1};
  const auto km = kaplan_meier(t, e);
  CHECK(km.at(0.5) == 1.0);
  CHECK(km.at(1.0) == 2.0 / 3.0);
  CHECK(km.at(2.0) == 2.0 / 3.0);
  CHECK(km.at(3.0) == 0.0);
  CHECK(km.before(1.0) == 1.0);
  CHECK(km.before(3.0) == 2.0 / 3.0);
}

TEST_CASE("Kaplan-Meier degenerate cases") {
  const std::vector<double> t = {1, 2, 3};
  const std::vector<int> none = {0, 0, 0};
  const auto all_censored = kaplan_meier(t, none);
  for (double s : {0.0, 1.0, 2.5, 10.0}) CHECK(all_censored.at(s) == 1.0);
  const std::vector<double> one = {4.0};
  const std::vector<int> ev = {1};
  const auto single = kaplan_meier(one, ev);
  CHECK(single.at(3.999) == 1.0);
  CHECK(single.at(4.0) == 0.0);
  CHECK(single.at(100.0) == 0.0);
}

TEST_CASE("Kaplan-Meier ties count deaths before censorings") {
  // At t = 2 one death and one censoring among 3 at risk: S = 1 * 2/3.
  const std::vector<double> t = {2, 2, 5};
  const std::vector<int> e = {1, 0, 1};
  const auto km = kaplan_meier(t, e);
  CHECK(km.at(2.0) == Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(km.at(5.0) == 0.0);
}

TEST_CASE("Brier score of constant one half without censoring") {
  SurvivalData d{{1.0, 2.0, 3.0, 4.0}, {1, 1, 1, 1}};
  const std::vector<double> times = {0.5, 2.5, 5.0};
  const std::vector<std::vector<double>> s(4, std::vector<double>(3, 0.5));
  const auto g = censoring_survival(d);
  const auto bs = brier_ipcw(s, d, times, g);
  for (double v : bs.scores) CHECK(v == Approx(0.25).epsilon(1e-15));
  CHECK(bs.excluded == 0);
}

TEST_CASE("Brier score of perfect step predictions is zero") {
  SurvivalData d{{1.0, 2.0, 3.0}, {1, 1, 1}};
  const std::vector<double> times = {0.5, 1.5, 2.5, 3.5};
  std::vector<std::vector<double>> s(3, std::vector<double>(4));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) s[i][j] = d.times[i] > times[j] ? 1.0 : 0.0;
  const auto bs = brier_ipcw(s, d, times, censoring_survival(d));
  for (double v : bs.scores) CHECK(v == 0.0);
}

TEST_CASE("Brier score with censoring weights by hand") {
  // Rows: (1, event), (2, censored), (3, event). G from flipped events:
  // G(t) = 1 before 2, 1/2 from 2 on. At t = 2.5 with predictions S = 0.4:
  //   row 1: event before t,   0.4^2 / G(1-) = 0.16
  //   row 2: censored before t, contributes 0
  //   row 3: still at risk,     0.6^2 / G(2.5) = 0.72
  SurvivalData d{{1.0, 2.0, 3.0}, {1, 0, 1}};
  const std::vector<double> times = {2.5};
  const std::vector<std::vector<double>> s(3, std::vector<double>(1, 0.4));
  const auto bs = brier_ipcw(s, d, times, censoring_survival(d));
  CHECK(bs.scores[0] == Approx((0.16 + 0.72) / 3.0).epsilon(1e-14));
}

TEST_CASE("integrated Brier score of a constant curve") {
  SurvivalData d{{1.0, 2.0, 3.0, 4.0}, {1, 1, 1, 1}};
  auto half = [&](std::span<const double> grid) {
    return std::vector<std::vector<double>>(4, std::vector<double>(grid.size(), 0.5));
  };
  CHECK(integrated_brier(half, d, 3.0, censoring_survival(d)) == Approx(0.25).epsilon(1e-14));
}

TEST_CASE("follow-up quartiles use type-7 interpolation") {
  SurvivalData d{{4.0, 1.0, 3.0, 2.0, 5.0}, {1, 1, 1, 1, 1}};
  const auto q = follow_up_quartiles(d);
  CHECK(q == std::vector<double>{2.0, 3.0, 4.0});
  SurvivalData e{{1.0, 2.0, 3.0, 4.0}, {1, 0, 1, 1}};
  CHECK(follow_up_quartiles(e) == std::vector<double>{1.75, 2.5, 3.25});
}

TEST_CASE("quantile predictions of a symmetric identity model") {
  const auto m = identity_model(BaseKind::Logistic, 0.0);
  const std::vector<double> x = {0.0};
  const std::vector<double> half = {0.5};
  CHECK(predict_quantile(m, x, half)[0] == Approx(0.0).scale(1.0).epsilon(1e-9));
  const auto shifted = identity_model(BaseKind::Normal, 1.3, std::log(0.7));
  const std::vector<double> qs = {0.1, 0.5, 0.975};
  const auto v = predict_quantile(shifted, x, qs);
  CHECK(v[1] == Approx(1.3).epsilon(1e-9));
  CHECK(v[2] == Approx(1.3 + 0.7 * 1.959963984540054).epsilon(1e-9));
  const auto c = predict_cdf(shifted, x, v);
  for (std::size_t k = 0; k < qs.size(); ++k) CHECK(std::abs(c[k] - qs[k]) < 1e-7);
}

TEST_CASE("density and cdf predictions agree") {
  const auto m = identity_model(BaseKind::MinExtremeValue, 0.4, 0.2);
  const std::vector<double> x = {0.0};
  const auto grid = default_grid(m, 2001);
  const auto f = predict_density(m, x, grid);
  const auto F = predict_cdf(m, x, grid);
  for (std::size_t k = 1; k < grid.size(); ++k) CHECK(F[k] >= F[k - 1]);
  double area = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) area += 0.5 * (f[k] + f[k - 1]) * (grid[k] - grid[k - 1]);
  CHECK(area == Approx(F.back() - F.front()).epsilon(1e-4));
}

TEST_CASE("ordinal predictions") {
  const auto m = ordinal_model({-1.0, 1.0}, 0.0);
  const std::vector<double> x = {0.0};
  const auto grid = default_grid(m);
  CHECK(grid == std::vector<double>{1.0, 2.0, 3.0});
  const auto mass = predict_density(m, x, grid);
  CHECK(mass[0] == Approx(0.2689414).epsilon(1e-7));
  CHECK(mass[0] + mass[1] + mass[2] == Approx(1.0).epsilon(1e-15));
  const auto cdf = predict_cdf(m, x, grid);
  CHECK(cdf[2] == 1.0);
  const std::vector<double> qs = {0.2, 0.5, 0.8};
  CHECK(predict_quantile(m, x, qs) == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("log-score") {
  const auto m = identity_model(BaseKind::Normal, 0.0);
  const auto d = one_row(Exact{0.0});
  CHECK(log_score(m, d) == Approx(-0.9189385).epsilon(1e-7));
  Dataset two;
  two.feature_names = {"x"};
  for (double y : {0.3, -1.2}) two.push_back(std::vector<double>{0.0}, Exact{y});
  Dataset four = two;
  for (double y : {0.3, -1.2}) four.push_back(std::vector<double>{0.0}, Exact{y});
  CHECK(log_score(m, two) == Approx(log_score(m, four)).epsilon(1e-15));
}

TEST_CASE("score summaries") {
  const auto one = summarize_scores({-1.5});
  CHECK(one.mean == -1.5);
  CHECK_FALSE(one.sd.has_value());
  const auto many = summarize_scores({1.0, 2.0, 3.0, 4.0});
  CHECK(many.mean == 2.5);
  CHECK(*many.sd == Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
}

TEST_CASE("martingale residuals") {
  // MinEV base with h(t) = t - mu: log S = -exp(t - mu).
  const OutcomeSpec surv{OutcomeKind::Survival, "time", "status", 0};
  SUBCASE("event with cumulative hazard one") {
    const auto m = identity_model(BaseKind::MinExtremeValue, 2.0, {}, surv);
    const auto r = martingale_residuals(m, one_row(Exact{2.0}, 0.0, OutcomeKind::Survival));
    CHECK(r.residuals[0] == Approx(0.0).scale(1.0).epsilon(1e-14));
  }
  SUBCASE("censored with no hazard") {
    const auto m = identity_model(BaseKind::MinExtremeValue, 42.0, {}, surv);
    const auto r = martingale_residuals(m, one_row(Interval{2.0, kInf}, 0.0, OutcomeKind::Survival));
    CHECK(r.residuals[0] == Approx(0.0).scale(1.0).epsilon(1e-15));
  }
  SUBCASE("event with no hazard") {
    const auto m = identity_model(BaseKind::MinExtremeValue, 42.0, {}, surv);
    const auto r = martingale_residuals(m, one_row(Exact{2.0}, 0.0, OutcomeKind::Survival));
    CHECK(r.residuals[0] == Approx(1.0).epsilon(1e-15));
    CHECK(r.flagged == 0);
  }
  SUBCASE("zero survival is flagged") {
    const auto m = identity_model(BaseKind::MinExtremeValue, -700.0, {}, surv);
    const auto r = martingale_residuals(m, one_row(Exact{45.0}, 0.0, OutcomeKind::Survival));
    CHECK(std::isinf(r.residuals[0]));
    CHECK(r.flagged == 1);
  }
}
