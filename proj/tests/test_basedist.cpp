#include <doctest.h>

#include <cmath>

#include "drift/basedist.hpp"

using namespace drift;
using doctest::Approx;

namespace {
const BaseDistribution logistic(BaseKind::Logistic);
const BaseDistribution normal(BaseKind::Normal);
const BaseDistribution minev(BaseKind::MinExtremeValue);
}  // namespace

TEST_CASE("cdf at zero") {
  CHECK(logistic.cdf(0.0) == 0.5);
  CHECK(normal.cdf(0.0) == Approx(0.5).epsilon(1e-15));
  CHECK(minev.cdf(0.0) == Approx(0.6321206).epsilon(1e-7));
}

TEST_CASE("log density at zero") {
  CHECK(logistic.log_pdf(0.0) == Approx(-1.3862944).epsilon(1e-7));
  CHECK(normal.log_pdf(0.0) == Approx(-0.9189385).epsilon(1e-7));
  CHECK(minev.log_pdf(0.0) == Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("log survival at zero") {
  CHECK(minev.log_survival(0.0) == Approx(-1.0).epsilon(1e-15));
  CHECK(logistic.log_survival(0.0) == Approx(-0.6931472).epsilon(1e-7));
  CHECK(normal.log_survival(0.0) == Approx(-0.6931472).epsilon(1e-7));
}

TEST_CASE("quantiles") {
  CHECK(logistic.quantile(0.5) == Approx(0.0).epsilon(1e-15));
  CHECK(minev.quantile(1.0 - std::exp(-1.0)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normal.quantile(0.975) == Approx(1.959964).epsilon(1e-6));
  CHECK_THROWS_AS(normal.quantile(0.0), DomainError);
  CHECK_THROWS_AS(logistic.quantile(1.0), DomainError);
}

TEST_CASE("quantile inverts the cdf") {
  for (const auto* d : {&logistic, &normal, &minev})
    for (double p : {1e-10, 1e-4, 0.2, 0.5, 0.9, 1 - 1e-6}) CHECK(d->cdf(d->quantile(p)) == Approx(p).epsilon(1e-9));
}

TEST_CASE("tails stay finite where the naive form underflows") {
  // Normal: log Phi(-40) = -804.608442013754... (asymptotic series).
  CHECK(normal.log_cdf(-40.0) == Approx(-804.6084420137538).epsilon(1e-12));
  CHECK(normal.log_survival(40.0) == Approx(-804.6084420137538).epsilon(1e-12));
  CHECK(logistic.log_cdf(-800.0) == Approx(-800.0).epsilon(1e-15));
  CHECK(minev.log_survival(5.0) == Approx(-std::exp(5.0)).epsilon(1e-15));
  CHECK(minev.log_cdf(-50.0) == Approx(-50.0).epsilon(1e-12));
}

TEST_CASE("Var versions carry the analytic derivative") {
  for (const auto* d : {&logistic, &normal, &minev}) {
    for (double z : {-2.0, 0.3, 1.7}) {
      Tape t;
      Var v = t.param(z);
      const double h = 1e-6;
      auto fd = [&](auto f) { return (f(z + h) - f(z - h)) / (2 * h); };
      CHECK(t.backward(d->cdf(v)).by_param[0] == Approx(fd([&](double u) { return d->cdf(u); })).epsilon(1e-7));
      CHECK(t.backward(d->log_pdf(v)).by_param[0] == Approx(d->dlog_pdf(z)).epsilon(1e-12));
      CHECK(t.backward(d->log_cdf(v)).by_param[0] ==
            Approx(fd([&](double u) { return d->log_cdf(u); })).epsilon(1e-7));
      CHECK(t.backward(d->log_survival(v)).by_param[0] ==
            Approx(fd([&](double u) { return d->log_survival(u); })).epsilon(1e-7));
    }
  }
}

TEST_CASE("base names") {
  CHECK(parse_base_kind("minimum_extreme_value") == BaseKind::MinExtremeValue);
  CHECK(to_string(BaseKind::Normal) == "normal");
  CHECK_THROWS_AS(parse_base_kind("gumbel"), ConfigError);
}
