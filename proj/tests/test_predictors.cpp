#include <doctest.h>

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "drift/init.hpp"
#include "drift/predictors.hpp"

using namespace drift;
using doctest::Approx;

namespace {
const std::vector<std::string> names = {"x1", "x2", "x3"};

std::vector<TermSpec> terms(std::vector<std::string> items) {
  return parse_terms(items, names);
}
}  // namespace

TEST_CASE("term grammar") {
  const auto t = terms({"intercept", "linear(*)", "nbf(x2; 16,8)", "bivariate(x1,x3)", "deep(*; 20,20)"});
  REQUIRE(t.size() == 7);
  CHECK(t[0].kind == TermKind::Intercept);
  CHECK(t[1].kind == TermKind::Linear);
  CHECK(t[3].features == std::vector<std::size_t>{2});
  CHECK(t[4].hidden == std::vector<int>{16, 8});
  CHECK(t[5].kind == TermKind::Bivariate);
  CHECK(t[5].features == std::vector<std::size_t>{0, 2});
  CHECK(t[6].features == std::vector<std::size_t>{0, 1, 2});
  CHECK(terms({"nbf(x1)"})[0].hidden == kNeuralBasisDefault);
  for (const auto& s : t) CHECK(parse_terms(std::vector<std::string>{format_term(s, names)}, names)[0] == s);
}

TEST_CASE("feature names with spaces") {
  const std::vector<std::string> wine = {"fixed acidity", "citric acid"};
  const auto t = parse_terms(std::vector<std::string>{"nbf(citric acid; 8, 8)"}, wine);
  REQUIRE(t.size() == 1);
  CHECK(t[0].features == std::vector<std::size_t>{1});
  CHECK(t[0].hidden == std::vector<int>{8, 8});
}

TEST_CASE("malformed terms are config errors") {
  CHECK_THROWS_AS(terms({"linear(z)"}), ConfigError);
  CHECK_THROWS_AS(terms({"spline(x1)"}), ConfigError);
  CHECK_THROWS_AS(terms({"nbf(x1; 0)"}), ConfigError);
  CHECK_THROWS_AS(terms({"deep(*; 30)"}), ConfigError);
  CHECK_THROWS_AS(terms({"linear(x1"}), ConfigError);
}

TEST_CASE("intercept and linear predictor values") {
  Predictor p(terms({"intercept"}), 3, OutputTransform::Identity);
  const std::vector<double> x = {0.3, -1.0, 2.0};
  const std::vector<double> b0 = {1.2};
  CHECK(p.eval<double>(b0, x) == 1.2);

  Predictor lin(terms({"linear(x1)", "linear(x2)"}), 3, OutputTransform::Identity);
  const std::vector<double> beta = {2.0, -1.0};
  const std::vector<double> x13 = {1.0, 3.0, 0.0};
  CHECK(lin.eval<double>(beta, x13) == -1.0);

  Predictor sc(terms({"intercept"}), 3, OutputTransform::Exp);
  const std::vector<double> zero = {0.0};
  CHECK(sc.eval<double>(zero, x) == 1.0);
}

TEST_CASE("partial effect of a linear term is a centered line") {
  Predictor lin(terms({"linear(x1)"}), 3, OutputTransform::Identity);
  const std::vector<double> beta = {2.0};
  const std::vector<double> grid = {-1.0, 0.0, 1.0};
  CHECK(lin.partial_effect(beta, 0, grid) == std::vector<double>{-2.0, 0.0, 2.0});
}

TEST_CASE("partial effect of a network is centered") {
  Predictor p(terms({"nbf(x2; 8,8)"}), 3, OutputTransform::Identity);
  Rng rng(4);
  std::vector<double> params(p.num_params());
  p.init(params, rng);
  std::vector<double> grid(100);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = -3.0 + 0.06 * static_cast<double>(i);
  const auto c = p.partial_effect(params, 0, grid);
  const double mean = std::accumulate(c.begin(), c.end(), 0.0) / 100.0;
  CHECK(std::abs(mean) < 1e-12);

  // All-zero weights give a constant output; centering removes it.
  std::vector<double> zeros(p.num_params(), 0.0);
  for (double v : p.partial_effect(zeros, 0, grid)) CHECK(v == 0.0);
}

TEST_CASE("initialization") {
  Predictor p(terms({"intercept", "linear(*)", "nbf(x1; 64,64)"}), 3, OutputTransform::Identity);
  Rng a(9);
  Rng b(9);
  std::vector<double> pa(p.num_params());
  std::vector<double> pb(p.num_params());
  p.init(pa, a);
  p.init(pb, b);
  CHECK(pa == pb);
  // Linear coefficients start at zero.
  for (std::size_t k = 1; k <= 3; ++k) CHECK(pa[p.term_offset(k)] == 0.0);
  CHECK(glorot_bound(64, 64) == Approx(0.21651).epsilon(1e-5));
}

TEST_CASE("wrong feature dimension is rejected") {
  Predictor lin(terms({"linear(x1)"}), 3, OutputTransform::Identity);
  const std::vector<double> beta = {2.0};
  const std::vector<double> x = {1.0};
  CHECK_THROWS(lin.eval<double>(beta, x));
}

TEST_CASE("network term gradients match finite differences") {
  Predictor p(terms({"nbf(x1; 4,3)", "bivariate(x2,x3; 3)", "deep(*; 20)"}), 3, OutputTransform::Exp);
  Rng rng(12);
  std::vector<double> params(p.num_params());
  p.init(params, rng);
  for (auto& v : params) v += uniform(rng, -0.2, 0.2);
  const std::vector<double> x = {0.4, -1.1, 0.9};
  Tape t;
  std::vector<Var> vars;
  for (double v : params) vars.push_back(t.param(v));
  const auto g = t.backward(p.eval<Var>(std::span<const Var>(vars), x));
  for (std::size_t k = 0; k < params.size(); k += 7) {
    auto q = params;
    const double h = 1e-6;
    q[k] += h;
    const double fp = p.eval<double>(q, x);
    q[k] -= 2 * h;
    const double fm = p.eval<double>(q, x);
    CHECK(g.by_param[k] == Approx((fp - fm) / (2 * h)).epsilon(1e-6).scale(1.0));
  }
}
