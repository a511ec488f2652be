#include <doctest.h>

#include <cmath>
#include <vector>

#include "drift/training.hpp"
#include "test_support.hpp"

using namespace drift;
using namespace drift::testing;
using doctest::Approx;

TEST_CASE("positive initialization bounds") {
  CHECK(positive_init_bound(InitScheme::MaxFanPositive, 100, 100) == Approx(0.03).epsilon(1e-15));
  CHECK(positive_init_bound(InitScheme::XavierPositive, 100, 100) == Approx(0.17321).epsilon(1e-5));
  CHECK(positive_init_bound(InitScheme::VariancePreservingPositive, 100, 100) ==
        Approx(std::sqrt(3.0 / 200.0)).epsilon(1e-15));
  CHECK(positive_init_bound(InitScheme::MaxFanPositive, 1, 20) == Approx(0.15).epsilon(1e-15));
}

TEST_CASE("one Adam step with unit gradient") {
  Adam adam(2, 1e-3);
  std::vector<double> p = {1.0, -2.0};
  const std::vector<double> g = {1.0, 0.0};
  adam.step(p, g);
  // Bias-corrected m = 1, v = 1: the step is lr / (1 + eps).
  CHECK(1.0 - p[0] == Approx(1e-3 / (1.0 + 1e-8)).epsilon(1e-12));
  CHECK(p[1] == -2.0);
  CHECK(adam.steps() == 1);
}

TEST_CASE("Adam learning-rate decay") {
  // With a constant gradient the bias-corrected ratio stays at 1/(1+eps), so
  // step t moves by lr / (1 + decay (t - 1)) / (1 + eps).
  Adam adam(1, 0.1, 0.5);
  std::vector<double> p = {0.0};
  const std::vector<double> g = {2.0};
  double expected = 0.0;
  for (int t = 1; t <= 4; ++t) {
    adam.step(p, g);
    expected -= 0.1 / (1.0 + 0.5 * (t - 1)) * 2.0 / (2.0 + 1e-8);
  }
  CHECK(p[0] == Approx(expected).epsilon(1e-12));
}

TEST_CASE("global norm clipping") {
  std::vector<double> g = {3.0, 4.0};
  CHECK(clip_global_norm(g, 1.0) == 5.0);
  CHECK(g[0] == Approx(0.6).epsilon(1e-15));
  CHECK(g[1] == Approx(0.8).epsilon(1e-15));
  std::vector<double> small = {0.1, 0.2};
  clip_global_norm(small, 1.0);
  CHECK(small == std::vector<double>{0.1, 0.2});
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.learning_rate = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.validation_fraction = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

namespace {

Dataset gaussian_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Dataset d;
  d.feature_names = {"x"};
  for (std::size_t i = 0; i < n; ++i) {
    const double x = z(rng);
    d.push_back(std::vector<double>{x}, Exact{1.0 + 2.0 * x + 0.5 * z(rng)});
  }
  return d;
}

ModelSpec linear_spec() {
  ModelSpec s;
  s.base = BaseKind::Normal;
  s.feature_names = {"x"};
  s.flow.kind = FlowKind::Bernstein;
  s.flow.order = 1;
  s.location = parse_terms(std::vector<std::string>{"linear(x)"}, s.feature_names);
  return s;
}

}  // namespace

TEST_CASE("fit is deterministic for a fixed seed") {
  const Dataset d = gaussian_data(300, 1);
  TrainConfig c;
  c.learning_rate = 0.05;
  c.epochs = 15;
  c.batch_size = 50;
  c.seed = 42;
  DriftModel a = init_model(linear_spec(), d, c.init, c.seed);
  DriftModel b = init_model(linear_spec(), d, c.init, c.seed);
  const auto ra = fit(a, d, c);
  const auto rb = fit(b, d, c);
  CHECK(a.params() == b.params());
  CHECK(ra.train_nll == rb.train_nll);
  CHECK(ra.val_nll == rb.val_nll);
  CHECK(ra.best_epoch == rb.best_epoch);
  CHECK(ra.n_train == 270);
  CHECK(ra.n_validation == 30);
}

TEST_CASE("fit lowers the training loss") {
  const Dataset d = gaussian_data(400, 2);
  TrainConfig c;
  c.learning_rate = 0.05;
  c.epochs = 40;
  c.batch_size = 40;
  c.validation_fraction = 0.0;
  DriftModel m = init_model(linear_spec(), d, c.init, 3);
  const auto r = fit(m, d, c);
  CHECK(r.val_nll.empty());
  CHECK(r.train_nll.back() < r.train_nll.front() - 0.5);
  CHECK(r.stop_reason == "max_epochs");
  CHECK(r.epochs_run == 40);
}

TEST_CASE("early stopping restores the best validation epoch") {
  const Dataset d = gaussian_data(200, 5);
  TrainConfig c;
  c.learning_rate = 0.2;
  c.epochs = 400;
  c.batch_size = 20;
  c.patience = 3;
  DriftModel m = init_model(linear_spec(), d, c.init, 1);
  const auto r = fit(m, d, c);
  CHECK(r.stop_reason == "early_stopping");
  CHECK(r.epochs_run == r.best_epoch + c.patience);
  // Restored parameters reproduce the best validation loss.
  double best = r.val_nll[static_cast<std::size_t>(r.best_epoch - 1)];
  for (double v : r.val_nll) CHECK(v >= best);
}

TEST_CASE("zero-gradient parameters are untouched by training") {
  // With a constant feature the scale slope multiplies zero, so its gradient
  // vanishes and Adam must leave it alone.
  Dataset d = gaussian_data(100, 7);
  ModelSpec s = linear_spec();
  s.scale = parse_terms(std::vector<std::string>{"linear(x)"}, s.feature_names);
  Dataset flat;
  flat.feature_names = {"x"};
  for (std::size_t i = 0; i < d.size(); ++i) flat.push_back(std::vector<double>{0.0}, d.outcomes[i]);
  DriftModel f = init_model(s, flat, InitScheme::MaxFanPositive, 1);
  const double before = f.params().back();
  TrainConfig c;
  c.epochs = 5;
  c.validation_fraction = 0.0;
  fit(f, flat, c);
  CHECK(f.params().back() == before);
}

TEST_CASE("saturation probe contrast") {
  const auto maxfan = saturation_probe({100, 100, 20}, InitScheme::MaxFanPositive, 2000, 1);
  const auto xavier = saturation_probe({100, 100, 20}, InitScheme::XavierPositive, 2000, 1);
  REQUIRE(maxfan.size() == 5);
  CHECK(maxfan[4].width == 1);
  CHECK(maxfan[4].saturated < 0.01);
  CHECK(xavier[4].saturated > 0.5);
  CHECK(maxfan[1].quantiles.size() == kProbeLevels.size());
}

TEST_CASE("divergence is reported with its position") {
  const Dataset d = gaussian_data(50, 3);
  DriftModel m = init_model(linear_spec(), d, InitScheme::MaxFanPositive, 1);
  // Collapse the Bernstein slope so dh/dy underflows to zero.
  auto p = m.params();
  p[1] = -1000.0;
  m.set_params(p);
  TrainConfig c;
  c.epochs = 2;
  CHECK_THROWS_AS(fit(m, d, c), DivergenceError);
}
