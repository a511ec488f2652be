#include <doctest.h>

#include <cmath>
#include <vector>

#include "drift/diffcore.hpp"

using namespace drift;
using doctest::Approx;

TEST_CASE("lifted constants and params keep their values") {
  Tape t;
  CHECK(t.lift(0.0).value() == 0.0);
  CHECK(t.param(1.5).value() == 1.5);
}

TEST_CASE("gradient of the identity is one") {
  Tape t;
  Var x = t.param(3.0);
  const auto g = t.backward(x);
  REQUIRE(g.by_param.size() == 1);
  CHECK(g.by_param[0] == 1.0);
}

TEST_CASE("elementary functions at the origin") {
  Tape t;
  Var z = t.param(0.0);
  CHECK(tanh(z).value() == 0.0);
  CHECK(softplus(z).value() == Approx(0.6931472).epsilon(1e-7));
  CHECK(sigmoid(z).value() == 0.5);
}

TEST_CASE("d/dx x*x at 3 is 6") {
  Tape t;
  Var x = t.param(3.0);
  CHECK(t.backward(x * x).by_param[0] == 6.0);
}

TEST_CASE("d/dx softplus(x) at 0 is one half") {
  Tape t;
  Var x = t.param(0.0);
  CHECK(t.backward(softplus(x)).by_param[0] == Approx(0.5).epsilon(1e-15));
}

TEST_CASE("params used twice accumulate adjoints") {
  Tape t;
  Var a = t.param(0.7);
  Var b = t.param(-2.0);
  const auto g = t.backward(a + b + a + b);
  CHECK(g.by_param[0] == 2.0);
  CHECK(g.by_param[1] == 2.0);
}

TEST_CASE("gradient is ordered by param registration") {
  Tape t;
  Var a = t.param(2.0);
  Var c = t.lift(10.0);
  Var b = t.param(5.0);
  const auto g = t.backward(a * c + 3.0 * b);
  CHECK(g.by_param == std::vector<double>{10.0, 3.0});
  CHECK(g.of(a).value() == 10.0);
  CHECK_FALSE(g.of(c).has_value());
}

TEST_CASE("compound expression matches the hand derivative") {
  // f = log(1 + exp(x*y)) / y + pow(x, 3) ; df/dx = sigmoid(xy) + 3x^2,
  // df/dy = x sigmoid(xy)/y - softplus(xy)/y^2.
  const double xv = 0.3;
  const double yv = -1.7;
  Tape t;
  Var x = t.param(xv);
  Var y = t.param(yv);
  Var f = softplus(x * y) / y + pow(x, 3.0);
  const auto g = t.backward(f);
  const double s = 1.0 / (1.0 + std::exp(-xv * yv));
  CHECK(g.by_param[0] == Approx(s + 3 * xv * xv).epsilon(1e-14));
  CHECK(g.by_param[1] ==
        Approx(xv * s / yv - std::log1p(std::exp(xv * yv)) / (yv * yv)).epsilon(1e-14));
}

TEST_CASE("min and max with constants route the gradient") {
  Tape t;
  Var x = t.param(2.0);
  CHECK(t.backward(min(x, 1.0)).by_param[0] == 0.0);
  CHECK(t.backward(max(x, 1.0)).by_param[0] == 1.0);
  CHECK(t.backward(relu(x)).by_param[0] == 1.0);
}

TEST_CASE("dot and sum nodes agree with explicit arithmetic") {
  Tape t;
  std::vector<Var> a = {t.param(1.0), t.param(2.0), t.param(3.0)};
  std::vector<Var> b = {t.param(-1.0), t.param(0.5), t.param(4.0)};
  Var bias = t.param(0.25);
  Var d = dot(std::span<const Var>(a), std::span<const Var>(b), &bias);
  CHECK(d.value() == 1.0 * -1.0 + 2.0 * 0.5 + 3.0 * 4.0 + 0.25);
  const auto g = t.backward(d);
  CHECK(g.by_param == std::vector<double>{-1.0, 0.5, 4.0, 1.0, 2.0, 3.0, 1.0});

  Tape u;
  std::vector<Var> v = {u.param(1.0), u.param(2.0)};
  Var s = sum(std::span<const Var>(v));
  CHECK(s.value() == 3.0);
  CHECK(u.backward(s * s).by_param == std::vector<double>{6.0, 6.0});
}

TEST_CASE("backward is repeatable") {
  Tape t;
  Var x = t.param(1.25);
  Var f = exp(x) * log(x);
  const auto g1 = t.backward(f);
  const auto g2 = t.backward(f);
  CHECK(g1.by_param == g2.by_param);
}

TEST_CASE("non-finite adjoints are reported") {
  Tape t;
  Var x = t.param(1e-320);
  const auto g = t.backward(log(x));
  CHECK_FALSE(g.finite);
  CHECK_THROWS_AS(log(t.param(0.0)), DomainError);
}

TEST_CASE("mixing tapes is an error") {
  Tape a;
  Tape b;
  Var x = a.param(1.0);
  Var y = b.param(1.0);
  CHECK_THROWS_AS(x + y, Error);
}

TEST_CASE("softplus and its inverse") {
  for (double y : {1e-6, 0.1, 1.0, 5.0, 40.0}) CHECK(softplus(softplus_inv(y)) == Approx(y).epsilon(1e-12));
  CHECK(softplus(-800.0) == 0.0);
  CHECK(softplus(800.0) == 800.0);
  CHECK_THROWS_AS(softplus_inv(0.0), DomainError);
}
