#include "drift/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace drift {

namespace {

// Independent streams derived from one user seed.
Rng stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return Rng(seq);
}

enum Stream : std::uint64_t { kInitStream = 1, kSplitStream = 2, kShuffleStream = 3, kDropoutStream = 4 };

double quantile_sorted(const std::vector<double>& v, double p) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + frac * (v[i + 1] - v[i]);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("training.learning_rate must be positive");
  if (!(decay >= 0.0)) throw ConfigError("training.decay must be non-negative");
  if (epochs < 1) throw ConfigError("training.epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("training.batch_size must be at least 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw ConfigError("training.validation_fraction must lie in [0, 1)");
  if (patience < 1) throw ConfigError("training.patience must be at least 1");
}

void init_params(DriftModel& model, InitScheme scheme, std::uint64_t seed) {
  Rng rng = stream(seed, kInitStream);
  std::vector<double> p(model.num_params(), 0.0);
  const auto& cif = model.flow();
  const std::size_t n_ref = num_params(cif.reference());
  std::span<double> ref(p.data(), n_ref);
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, MonotoneNetFlow>) r.init(ref, scheme, rng);
        else r.init(ref, model.base());
      },
      cif.reference());
  cif.location().init(std::span<double>(p.data() + cif.location_offset(), cif.location().num_params()),
                      rng);
  if (cif.scale())
    cif.scale()->init(std::span<double>(p.data() + cif.scale_offset(), cif.scale()->num_params()),
                      rng);
  model.set_params(std::move(p));
}

DriftModel init_model(const ModelSpec& spec, const Dataset& data, InitScheme scheme,
                      std::uint64_t seed) {
  if (data.size() == 0) throw DataError("cannot initialize a model from an empty dataset");
  DriftModel model(spec, calibrate_flow(data), Standardizer::fit(data));
  init_params(model, scheme, seed);
  return model;
}

Adam::Adam(std::size_t n, double learning_rate, double decay, double beta1, double beta2,
           double eps)
    : lr_(learning_rate), decay_(decay), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0),
      v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw Error("Adam: parameter/gradient size mismatch");
  ++t_;
  const double t = static_cast<double>(t_);
  const double lr = lr_ / (1.0 + decay_ * (t - 1.0));
  const double c1 = 1.0 - std::pow(beta1_, t);
  const double c2 = 1.0 - std::pow(beta2_, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
  }
}

double clip_global_norm(std::span<double> grad, double max_norm) {
  double ss = 0.0;
  for (double g : grad) ss += g * g;
  const double norm = std::sqrt(ss);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& g : grad) g *= s;
  }
  return norm;
}

FitReport fit(DriftModel& model, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.size() == 0) throw DataError("cannot fit on an empty dataset");
  const auto t0 = std::chrono::steady_clock::now();
  const PreparedData prepared = prepare_data(model, data);

  std::vector<std::size_t> order = all_rows(data.size());
  {
    Rng split = stream(cfg.seed, kSplitStream);
    std::shuffle(order.begin(), order.end(), split);
  }
  auto n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(data.size())));
  if (n_val >= data.size()) n_val = data.size() - 1;
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());

  FitReport report;
  report.n_train = train.size();
  report.n_validation = val.size();

  Rng shuffle = stream(cfg.seed, kShuffleStream);
  Rng dropout = stream(cfg.seed, kDropoutStream);
  EvalContext ctx{&dropout};
  Adam adam(model.num_params(), cfg.learning_rate, cfg.decay);
  std::vector<double> params = model.params();
  std::vector<double> best = params;
  double best_score = std::numeric_limits<double>::infinity();
  int since_best = 0;
  report.stop_reason = "max_epochs";

  Tape tape;
  std::vector<Var> vars;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), shuffle);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    int batch_no = 0;
    for (std::size_t start = 0; start < train.size(); start += cfg.batch_size) {
      ++batch_no;
      const std::size_t end = std::min(train.size(), start + cfg.batch_size);
      const std::span<const std::size_t> rows(train.data() + start, end - start);
      tape.clear();
      vars.clear();
      for (double p : params) vars.push_back(tape.param(p));
      Var loss;
      Gradient g;
      try {
        loss = nll(tape, model, vars, prepared, rows, ctx);
        g = tape.backward(loss);
      } catch (const NonFiniteError& e) {
        throw DivergenceError(std::string("divergence: ") + e.what(), epoch, batch_no);
      }
      if (!std::isfinite(loss.value()) || !g.finite)
        throw DivergenceError("divergence: non-finite loss or gradient", epoch, batch_no);
      clip_global_norm(g.by_param, cfg.clip_norm);
      adam.step(params, g.by_param);
      for (double p : params)
        if (!std::isfinite(p))
          throw DivergenceError("divergence: non-finite parameter after update", epoch, batch_no);
      loss_sum += loss.value() * static_cast<double>(rows.size());
      seen += rows.size();
    }
    report.train_nll.push_back(loss_sum / static_cast<double>(seen));
    report.epochs_run = epoch;

    double score = report.train_nll.back();
    if (!val.empty()) {
      score = nll_value(model, params, prepared, val, Extrapolation::Clamp);
      if (!std::isfinite(score))
        throw DivergenceError("divergence: non-finite validation loss", epoch, batch_no);
      report.val_nll.push_back(score);
    }
    if (score < best_score) {
      best_score = score;
      best = params;
      report.best_epoch = epoch;
      since_best = 0;
    } else if (!val.empty() && ++since_best >= cfg.patience) {
      report.stop_reason = "early_stopping";
      break;
    }
  }
  model.set_params(val.empty() ? params : best);
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

std::vector<LayerSummary> saturation_probe(const std::vector<int>& hidden, InitScheme scheme,
                                           std::size_t n, std::uint64_t seed) {
  const MonotoneNetFlow net(hidden, 0.0, 1.0);
  std::vector<double> params(net.num_params());
  Rng rng = stream(seed, kInitStream);
  net.init(params, scheme, rng);
  Rng sampler = stream(seed, kSplitStream);
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto& widths = net.widths();
  std::vector<std::vector<double>> pooled(widths.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto acts = net.activations(params, normal(sampler));
    for (std::size_t k = 0; k < acts.size(); ++k)
      pooled[k].insert(pooled[k].end(), acts[k].begin(), acts[k].end());
  }
  std::vector<LayerSummary> out;
  for (std::size_t k = 0; k < pooled.size(); ++k) {
    auto& v = pooled[k];
    LayerSummary s;
    s.width = widths[k];
    const auto sat = std::count_if(v.begin(), v.end(), [](double a) { return std::abs(a) > 0.999; });
    s.saturated = v.empty() ? 0.0 : static_cast<double>(sat) / static_cast<double>(v.size());
    std::sort(v.begin(), v.end());
    for (double p : kProbeLevels) s.quantiles.push_back(quantile_sorted(v, p));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace drift
