// drift: command-line front end for training, evaluating and probing DRIFT
// models.
//
// Exit codes: 0 success, 1 internal error or failed check, 2 usage or
// configuration error, 3 data error, 4 training divergence.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "drift/config.hpp"
#include "drift/evaldiag.hpp"
#include "drift/experiment.hpp"
#include "drift/gradcheck.hpp"
#include "drift/likelihood.hpp"
#include "drift/model_io.hpp"
#include "drift/training.hpp"

using namespace drift;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& a) {
  RunConfig cfg = load_config(a.config);
  if (a.seed) cfg.train.seed = *a.seed;
  const Dataset data = load_csv(a.data, cfg.schema);
  DriftModel model = init_model(cfg.spec, data, cfg.train.init, cfg.train.seed);
  const FitReport report = fit(model, data, cfg.train);
  save_model(a.out, SavedModel{model, cfg.schema, cfg.train, report});
  write_text(a.out + ".report.json", report_to_json(report));
  std::cerr << "trained " << model.num_params() << " parameters on " << report.n_train
            << " rows; best epoch " << report.best_epoch << " of " << report.epochs_run << " ("
            << report.stop_reason << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string model;
  std::string data;
  std::size_t folds = 1;
  std::uint64_t fold_seed = 1;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const SavedModel saved = load_model(a.model);
  const Dataset data = load_csv(a.data, saved.schema);
  check_compatible(saved.model, data);
  const bool survival = data.kind == OutcomeKind::Survival;

  std::cout << "fold,n,log_score,log_score_sd";
  if (survival) std::cout << ",tau_25,tau_50,tau_75,ibs_25,ibs_50,ibs_75,km_ibs_25,km_ibs_50,km_ibs_75";
  std::cout << "\n";
  auto ibs_cells = [](const IbsComparison& c) {
    std::string s;
    for (double v : c.taus) s += "," + num(v);
    for (double v : c.model) s += "," + num(v);
    for (double v : c.kaplan_meier) s += "," + num(v);
    return s;
  };

  if (a.folds <= 1) {
    // The stored model scored as is; the Kaplan-Meier baseline is fitted on
    // the same rows since no training split is known.
    std::cout << "all," << data.size() << "," << num(log_score(saved.model, data)) << ",";
    if (survival) std::cout << ibs_cells(compare_ibs(saved.model, data, data));
    std::cout << "\n";
    return 0;
  }

  const RunConfig cfg{saved.schema, saved.model.spec(), saved.train};
  const auto results = cross_validate(cfg, data, a.folds, a.fold_seed, worker_threads());
  std::vector<double> scores;
  std::vector<IbsComparison> ibs;
  for (const auto& r : results) {
    scores.push_back(r.log_score);
    std::cout << r.fold + 1 << "," << r.n_test << "," << num(r.log_score) << ",";
    if (r.ibs) {
      std::cout << ibs_cells(*r.ibs);
      ibs.push_back(*r.ibs);
    }
    std::cout << "\n";
  }
  const auto summary = summarize_scores(scores);
  std::cout << "mean," << data.size() << "," << num(summary.mean) << ","
            << (summary.sd ? num(*summary.sd) : "");
  if (survival && !ibs.empty()) {
    IbsComparison mean{std::vector<double>(3, 0.0), std::vector<double>(3, 0.0),
                       std::vector<double>(3, 0.0)};
    for (const auto& c : ibs)
      for (std::size_t k = 0; k < 3; ++k) {
        mean.taus[k] += c.taus[k] / static_cast<double>(ibs.size());
        mean.model[k] += c.model[k] / static_cast<double>(ibs.size());
        mean.kaplan_meier[k] += c.kaplan_meier[k] / static_cast<double>(ibs.size());
      }
    std::cout << ibs_cells(mean);
  }
  std::cout << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string model;
  std::string data;
  std::string what;
  std::vector<double> q = {0.1, 0.5, 0.9};
  std::size_t grid = kDefaultGridSize;
};

void print_partials(const DriftModel& model, const Dataset& data, std::size_t n_grid) {
  std::cout << "predictor,term,feature,x,effect\n";
  const auto& cif = model.flow();
  const auto& names = model.spec().feature_names;
  auto emit = [&](const char* which, const Predictor& pred, std::size_t offset) {
    const auto slice = std::span<const double>(model.params()).subspan(offset, pred.num_params());
    for (std::size_t t = 0; t < pred.terms().size(); ++t) {
      const auto& term = pred.terms()[t];
      if (!term.univariate()) continue;
      const std::size_t f = term.spec().features[0];
      double lo = kInf;
      double hi = -kInf;
      for (std::size_t i = 0; i < data.size(); ++i) {
        lo = std::min(lo, data.row(i)[f]);
        hi = std::max(hi, data.row(i)[f]);
      }
      std::vector<double> raw(n_grid);
      std::vector<double> grid(n_grid);
      for (std::size_t k = 0; k < n_grid; ++k) {
        raw[k] = n_grid == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n_grid - 1);
        grid[k] = model.standardizer().apply(f, raw[k]);
      }
      const auto effect = pred.partial_effect(slice, t, grid);
      const std::string label = format_term(term.spec(), names);
      for (std::size_t k = 0; k < n_grid; ++k)
        std::cout << which << "," << csv_escape(label) << "," << csv_escape(names[f]) << ","
                  << num(raw[k]) << "," << num(effect[k]) << "\n";
    }
  };
  emit("location", cif.location(), cif.location_offset());
  if (cif.scale()) emit("scale", *cif.scale(), cif.scale_offset());
}

int cmd_predict(const PredictArgs& a) {
  const SavedModel saved = load_model(a.model);
  const Dataset data = load_csv(a.data, saved.schema);
  check_compatible(saved.model, data);
  const auto& model = saved.model;
  if (a.what == "partial") {
    print_partials(model, data, a.grid);
    return 0;
  }
  if (a.what == "quantile") {
    for (double q : a.q)
      if (!(q > 0.0 && q < 1.0)) throw ConfigError("--q levels must lie in (0, 1)");
    std::cout << "row,q,quantile\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto v = predict_quantile(model, data.row(i), a.q);
      for (std::size_t k = 0; k < v.size(); ++k)
        std::cout << i + 1 << "," << num(a.q[k]) << "," << num(v[k]) << "\n";
    }
    return 0;
  }
  const bool cdf = a.what == "cdf";
  const auto grid = model.spec().flow.kind == FlowKind::Ordinal ? default_grid(model)
                                                                : default_grid(model, a.grid);
  std::cout << "row,y," << a.what << "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto v = cdf ? predict_cdf(model, data.row(i), grid) : predict_density(model, data.row(i), grid);
    for (std::size_t k = 0; k < grid.size(); ++k)
      std::cout << i + 1 << "," << num(grid[k]) << "," << num(v[k]) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string generator;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::string out;
};

double normal_log_pdf(double z) { return -0.5 * z * z - 0.5 * std::log(2.0 * M_PI); }
double logistic_cdf(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Mean log-likelihood of the data under the generating model, where it has a
// closed form.
std::optional<double> true_logscore(const std::string& generator, const Dataset& d) {
  if (generator == "example2") return oracle_logscore(d);
  double total = 0.0;
  if (generator == "linear_gaussian") {
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double y = std::get<Exact>(d.outcomes[i]).y;
      total += normal_log_pdf((y - 1.0 - 2.0 * d.row(i)[0]) / 0.5) - std::log(0.5);
    }
    return total / static_cast<double>(d.size());
  }
  if (generator == "ordinal") {
    const double cuts[] = {-kInf, -1.5, 0.0, 1.5, kInf};
    for (std::size_t i = 0; i < d.size(); ++i) {
      const int k = std::get<Discrete>(d.outcomes[i]).level;
      const double eta = d.row(i)[0] - 0.5 * d.row(i)[1];
      total += std::log(logistic_cdf(cuts[k] - eta) - logistic_cdf(cuts[k - 1] - eta));
    }
    return total / static_cast<double>(d.size());
  }
  return std::nullopt;
}

int cmd_simulate(const SimulateArgs& a) {
  if (a.n == 0) throw ConfigError("--n must be at least 1");
  Dataset d;
  std::vector<std::string> outcome_columns = {"y"};
  if (a.generator == "example2") {
    d = gen_example2(a.n, a.seed);
  } else if (a.generator == "linear_gaussian") {
    d = gen_linear_gaussian(a.n, a.seed);
  } else if (a.generator == "ordinal") {
    d = gen_ordinal(a.n, a.seed);
  } else {
    d = gen_survival_ph(a.n, a.seed);
    outcome_columns = {"time", "status"};
  }
  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + a.out + "'");
  write_dataset_csv(out, d, outcome_columns);
  const auto oracle = true_logscore(a.generator, d);
  nlohmann::json side = {{"generator", a.generator},
                         {"n", a.n},
                         {"seed", a.seed},
                         {"oracle_logscore", oracle ? nlohmann::json(*oracle) : nlohmann::json(nullptr)}};
  write_text(a.out + ".oracle", side.dump(1) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckArgs {
  std::string config;
  std::uint64_t seed = 1;
  std::size_t n = 16;
  std::size_t max_params = 2000;
};

int cmd_gradcheck(const GradcheckArgs& a) {
  const RunConfig cfg = load_config(a.config);
  const Dataset data = synthetic_data(cfg.spec, a.n, a.seed);
  DriftModel model = init_model(cfg.spec, data, cfg.train.init, a.seed);
  // Perturb away from the initializer's special values (zero biases).
  Rng rng(a.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> jitter(0.0, 0.1);
  auto p = model.params();
  for (auto& v : p) v += jitter(rng);
  model.set_params(p);
  const auto r = gradient_check(model, data, 1e-3, a.max_params, a.seed);
  std::cout << "max_relative_error " << num(r.max_relative) << "\n"
            << "max_absolute_error_near_zero " << num(r.max_absolute) << "\n"
            << "parameters_checked " << r.checked << " of " << model.num_params() << "\n";
  return r.max_relative > 1e-4 ? kExitFailure : 0;
}

// ---------------------------------------------------------------------------
// probe-init

struct ProbeArgs {
  std::string scheme;
  std::vector<int> hidden = {100, 100, 20};
  std::size_t n = 10000;
  std::uint64_t seed = 1;
};

int cmd_probe_init(const ProbeArgs& a) {
  const auto layers = saturation_probe(a.hidden, parse_init_scheme(a.scheme), a.n, a.seed);
  std::cout << "layer,width,saturated";
  for (double q : kProbeLevels) std::cout << ",q" << num(q);
  std::cout << "\n";
  for (std::size_t k = 0; k < layers.size(); ++k) {
    std::cout << k << "," << layers[k].width << "," << num(layers[k].saturated);
    for (double v : layers[k].quantiles) std::cout << "," << num(v);
    std::cout << "\n";
  }
  return 0;
}

int fail(int code, const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DRIFT distributional regression"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "fit a model and write it as JSON");
  c_train->add_option("--config", train.config, "TOML run configuration")->required();
  c_train->add_option("--data", train.data, "training CSV")->required();
  c_train->add_option("--out", train.out, "model file to write")->required();
  c_train->add_option("--seed", train.seed, "override the configured seed");

  EvaluateArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "log-score (and IBS for survival) as CSV");
  c_eval->add_option("--model", eval.model, "model file")->required();
  c_eval->add_option("--data", eval.data, "data CSV")->required();
  c_eval->add_option("--folds", eval.folds, "K > 1 refits the stored configuration per fold")
      ->check(CLI::PositiveNumber);
  c_eval->add_option("--fold-seed", eval.fold_seed, "seed of the fold partition");

  PredictArgs pred;
  auto* c_pred = app.add_subcommand("predict", "prediction surfaces as CSV");
  c_pred->add_option("--model", pred.model, "model file")->required();
  c_pred->add_option("--data", pred.data, "data CSV")->required();
  c_pred->add_option("--what", pred.what, "surface")
      ->required()
      ->check(CLI::IsMember({"cdf", "density", "quantile", "partial"}));
  c_pred->add_option("--q", pred.q, "quantile levels")->delimiter(',');
  c_pred->add_option("--grid", pred.grid, "grid points for cdf, density and partial")
      ->check(CLI::PositiveNumber);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "draw a synthetic data set");
  c_sim->add_option("--generator", sim.generator, "data generator")
      ->required()
      ->check(CLI::IsMember({"example2", "linear_gaussian", "ordinal", "survival"}));
  c_sim->add_option("--n", sim.n, "rows")->required();
  c_sim->add_option("--seed", sim.seed, "random seed");
  c_sim->add_option("--out", sim.out, "CSV to write")->required();

  GradcheckArgs gc;
  auto* c_gc = app.add_subcommand("gradcheck", "compare backward gradients with finite differences");
  c_gc->add_option("--config", gc.config, "TOML run configuration")->required();
  c_gc->add_option("--seed", gc.seed, "seed for data and parameters");
  c_gc->add_option("--max-params", gc.max_params, "check a random subset of at most this many parameters")
      ->check(CLI::PositiveNumber);

  ProbeArgs probe;
  auto* c_probe = app.add_subcommand("probe-init", "activation saturation of a fresh monotone net");
  c_probe->add_option("--scheme", probe.scheme, "maxfan, xavier or variance")
      ->required()
      ->check(CLI::IsMember({"maxfan", "xavier", "variance"}));
  c_probe->add_option("--hidden", probe.hidden, "hidden widths")->delimiter(',');
  c_probe->add_option("--n", probe.n, "standard-normal inputs")->check(CLI::PositiveNumber);
  c_probe->add_option("--seed", probe.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kExitConfig, e.what());
  }

  try {
    if (*c_train) return cmd_train(train);
    if (*c_eval) return cmd_evaluate(eval);
    if (*c_pred) return cmd_predict(pred);
    if (*c_sim) return cmd_simulate(sim);
    if (*c_gc) return cmd_gradcheck(gc);
    if (*c_probe) return cmd_probe_init(probe);
  } catch (const ConfigError& e) {
    return fail(kExitConfig, e.what());
  } catch (const DataError& e) {
    return fail(kExitData, e.what());
  } catch (const DivergenceError& e) {
    return fail(kExitDivergence, std::string(e.what()) + " (epoch " + std::to_string(e.epoch()) +
                                     ", batch " + std::to_string(e.batch()) + ")");
  } catch (const std::exception& e) {
    return fail(kExitFailure, e.what());
  }
  return kExitFailure;
}
