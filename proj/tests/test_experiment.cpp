#include <doctest.h>

#include <cstdlib>

#include "drift/experiment.hpp"
#include "drift/gradcheck.hpp"

using namespace drift;

namespace {

RunConfig small_config() {
  RunConfig c = parse_config(
      "[data]\nfeatures = [\"x\"]\noutcome = \"continuous(y)\"\n"
      "[flow]\nkind = \"bernstein\"\nbase = \"normal\"\norder = 3\n"
      "[location]\nterms = [\"linear(x)\"]\n"
      "[training]\nlearning_rate = 0.05\nepochs = 5\nbatch_size = 50\n");
  return c;
}

}  // namespace

TEST_CASE("cross-validation results do not depend on the worker count") {
  const auto cfg = small_config();
  const Dataset d = gen_linear_gaussian(300, 8);
  const auto one = cross_validate(cfg, d, 4, 2, 1);
  const auto three = cross_validate(cfg, d, 4, 2, 3);
  REQUIRE(one.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(one[k].fold == k);
    CHECK(three[k].fold == k);
    CHECK(one[k].log_score == three[k].log_score);
    CHECK(one[k].report.train_nll == three[k].report.train_nll);
    CHECK(one[k].n_test == 75);
    CHECK_FALSE(one[k].ibs.has_value());
  }
}

TEST_CASE("survival folds carry IBS comparisons") {
  RunConfig cfg = parse_config(
      "[data]\nfeatures = [\"x1\", \"x2\"]\noutcome = \"survival(time, status)\"\n"
      "[flow]\nkind = \"bernstein\"\nbase = \"minimum_extreme_value\"\norder = 4\n"
      "[location]\nterms = [\"linear(*)\"]\n[training]\nepochs = 3\nlearning_rate = 0.02\n");
  const auto res = cross_validate(cfg, gen_survival_ph(200, 1, 0.3), 2, 1, 2);
  REQUIRE(res[0].ibs.has_value());
  CHECK(res[0].ibs->taus.size() == 3);
  CHECK(res[0].ibs->model.size() == 3);
}

TEST_CASE("fold failures are rethrown") {
  auto cfg = small_config();
  const Dataset d = gen_linear_gaussian(10, 1);
  CHECK_THROWS_AS(cross_validate(cfg, d, 20, 1, 2), DataError);
}

TEST_CASE("worker count honours DRIFT_THREADS") {
  setenv("DRIFT_THREADS", "3", 1);
  CHECK(worker_threads() == 3);
  setenv("DRIFT_THREADS", "0", 1);
  CHECK(worker_threads() >= 1);
  unsetenv("DRIFT_THREADS");
  CHECK(worker_threads() >= 1);
}

TEST_CASE("gradient check on synthetic data of every outcome kind") {
  for (const char* outcome : {"continuous(y)", "interval(lo, hi)", "survival(t, s)", "ordinal(q, 4)"}) {
    CAPTURE(outcome);
    RunConfig cfg = parse_config(std::string("[data]\nfeatures = [\"a\", \"b\"]\noutcome = \"") + outcome +
                                 "\"\n[location]\nterms = [\"nbf(a; 4)\", \"linear(b)\"]\n"
                                 "[scale]\nterms = [\"linear(a)\"]\n");
    const Dataset d = synthetic_data(cfg.spec, 12, 4);
    CHECK(d.size() == 12);
    DriftModel m = init_model(cfg.spec, d, InitScheme::MaxFanPositive, 2);
    const auto r = gradient_check(m, d);
    CHECK(r.max_relative < 1e-5);
    CHECK(r.max_absolute < 1e-8);
    CHECK(r.checked == m.num_params());
    CHECK(gradient_check(m, d, 1e-3, 5, 1).checked == 5);
  }
}
