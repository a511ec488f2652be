#include <doctest.h>

#include <cmath>
#include <vector>

#include "drift/likelihood.hpp"
#include "test_support.hpp"

using namespace drift;
using namespace drift::testing;
using doctest::Approx;

namespace {

double loglik_of(const DriftModel& m, const Outcome& y, double x = 0.0) {
  const auto b = m.flow().bind<double>(m.params());
  const std::vector<double> row = {x};
  return loglik<double>(m, b, y, row, 0.0);
}

double sigmoid_d(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("exact outcomes under the identity flow") {
  CHECK(loglik_of(identity_model(BaseKind::Normal, 0.0), Exact{0.0}) == Approx(-0.9189385).epsilon(1e-7));
  CHECK(loglik_of(identity_model(BaseKind::Normal, 0.0, std::log(2.0)), Exact{0.0}) ==
        Approx(-1.6120857).epsilon(1e-7));
  // Shifting mu and y together leaves the likelihood unchanged.
  CHECK(loglik_of(identity_model(BaseKind::Normal, 3.7), Exact{3.7}) ==
        Approx(loglik_of(identity_model(BaseKind::Normal, 0.0), Exact{0.0})).epsilon(1e-12));
}

TEST_CASE("ordinal level probabilities") {
  const auto m = ordinal_model({-1.0, 1.0}, 0.0);
  CHECK(loglik_of(m, Discrete{1}) == Approx(std::log(0.2689414)).epsilon(1e-7));
  CHECK(loglik_of(m, Discrete{2}) == Approx(std::log(0.4621172)).epsilon(1e-7));
  CHECK(loglik_of(m, Discrete{3}) == Approx(std::log(0.2689414)).epsilon(1e-7));
  double total = 0.0;
  for (int k = 1; k <= 3; ++k) total += std::exp(loglik_of(m, Discrete{k}));
  CHECK(total == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("interval outcomes") {
  const auto normal = identity_model(BaseKind::Normal, 0.0);
  CHECK(loglik_of(normal, Interval{-kInf, kInf}) == 0.0);
  CHECK(loglik_of(normal, Interval{-kInf, 0.0}) == Approx(std::log(0.5)).epsilon(1e-12));
  const auto minev = identity_model(BaseKind::MinExtremeValue, 0.0);
  CHECK(loglik_of(minev, Interval{0.0, kInf}) == Approx(-1.0).epsilon(1e-14));
  // (a, b] mass equals the integral of the density.
  const double a = -0.3;
  const double b = 1.1;
  CHECK(std::exp(loglik_of(normal, Interval{a, b})) ==
        Approx(normal_cdf(b) - normal_cdf(a)).epsilon(1e-12));
  CHECK_THROWS_AS(loglik_of(normal, Interval{1.0, 1.0}), EmptyInterval);
}

TEST_CASE("narrow intervals tend to minus infinity") {
  const auto m = identity_model(BaseKind::Logistic, 0.0);
  double last = 0.0;
  for (double w : {1e-1, 1e-3, 1e-6, 1e-9}) {
    const double v = loglik_of(m, Interval{0.2, 0.2 + w});
    CHECK(v < last);
    last = v;
  }
  CHECK(last < -20.0);
}

TEST_CASE("upper-tail intervals avoid cancellation") {
  // F(12) - F(10) is 0 in double precision; the survival form keeps it.
  const auto m = identity_model(BaseKind::Normal, 0.0);
  CHECK(loglik_of(m, Interval{10.0, 12.0}) == Approx(-53.23128515074561).epsilon(1e-12));
  // Masses below 1e-300 are floored.
  CHECK(loglik_of(m, Interval{38.0, 40.0}) == Approx(std::log(kMassFloor)).epsilon(1e-15));
}

TEST_CASE("log_diff_exp floors the mass") {
  CHECK(detail::log_diff_exp(-1.0, -1.0) == Approx(std::log(kMassFloor)).epsilon(1e-12));
  CHECK(detail::log_diff_exp(0.0, std::log(0.25)) == Approx(std::log(0.75)).epsilon(1e-15));
}

TEST_CASE("nll of a single exact observation") {
  const auto m = identity_model(BaseKind::Normal, 0.5, std::log(1.5));
  const auto d = one_row(Exact{1.2});
  const auto prep = prepare_data(m, d);
  CHECK(nll_value(m, m.params(), prep, all_rows(1)) == Approx(-loglik_of(m, Exact{1.2})).epsilon(1e-14));
}

TEST_CASE("nll is invariant to duplicating the data") {
  const auto m = identity_model(BaseKind::Logistic, 0.2, 0.1);
  Dataset d;
  d.feature_names = {"x"};
  const std::vector<double> ys = {-1.0, 0.3, 2.2};
  for (double y : ys) d.push_back(std::vector<double>{0.0}, Exact{y});
  Dataset dd = d;
  for (double y : ys) dd.push_back(std::vector<double>{0.0}, Exact{y});
  const double a = nll_value(m, m.params(), prepare_data(m, d), all_rows(3));
  const double b = nll_value(m, m.params(), prepare_data(m, dd), all_rows(6));
  CHECK(a == Approx(b).epsilon(1e-14));
}

TEST_CASE("two-point ordinal nll against the hand sum") {
  const auto m = ordinal_model({-1.0, 1.0}, 0.0);
  Dataset d;
  d.feature_names = {"x"};
  d.kind = OutcomeKind::Ordinal;
  d.push_back(std::vector<double>{0.0}, Discrete{1});
  d.push_back(std::vector<double>{0.0}, Discrete{2});
  const double hand = -0.5 * (std::log(sigmoid_d(-1.0)) + std::log(sigmoid_d(1.0) - sigmoid_d(-1.0)));
  CHECK(std::abs(nll_value(m, m.params(), prepare_data(m, d), all_rows(2)) - hand) < 1e-12);
}

TEST_CASE("gradient of the identity-flow Gaussian nll") {
  // -log N(y; mu, s) has d/dmu = -(y - mu)/s^2 and d/dlog s = 1 - (y-mu)^2/s^2.
  const double mu = 0.4;
  const double s = 1.7;
  const double y = -0.9;
  const auto m = identity_model(BaseKind::Normal, mu, std::log(s));
  const auto d = one_row(Exact{y});
  const auto g = nll_and_gradient(m, m.params(), prepare_data(m, d), all_rows(1));
  const double r = (y - mu) / s;
  CHECK(g.gradient[2] == Approx(-r / s).epsilon(1e-10));
  CHECK(g.gradient[3] == Approx(1.0 - r * r).epsilon(1e-10));
}

TEST_CASE("data that does not match the model is rejected") {
  const auto m = ordinal_model({-1.0, 1.0}, 0.0);
  CHECK_THROWS_AS(check_compatible(m, one_row(Exact{0.3})), DataError);
  Dataset d = one_row(Discrete{4}, 0.0, OutcomeKind::Ordinal);
  d.kind = OutcomeKind::Ordinal;
  CHECK_THROWS_AS(check_compatible(m, d), DataError);
  Dataset other;
  other.feature_names = {"z"};
  other.kind = OutcomeKind::Ordinal;
  other.push_back(std::vector<double>{0.0}, Discrete{1});
  CHECK_THROWS_AS(check_compatible(m, other), DataError);
}

TEST_CASE("a non-increasing flow is a non-finite likelihood") {
  // Degenerate Bernstein flow: theta_1 = theta_2 gives dh/dy = 0.
  ModelSpec s;
  s.base = BaseKind::Normal;
  s.feature_names = {"x"};
  s.flow.kind = FlowKind::Bernstein;
  s.flow.order = 1;
  s.location = parse_terms(std::vector<std::string>{"intercept"}, s.feature_names);
  DriftModel m(s, FlowCalibration{0.0, 1.0, -1.0, 1.0}, Standardizer::identity(1));
  m.set_params({0.0, -800.0, 0.0});
  CHECK_THROWS_AS(loglik_of(m, Exact{0.1}), NonFiniteError);
}
