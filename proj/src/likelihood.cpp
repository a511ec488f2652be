#include "drift/likelihood.hpp"

#include <numeric>

namespace drift {

void check_compatible(const DriftModel& model, const Dataset& data) {
  const auto& spec = model.spec();
  if (data.num_features() != spec.feature_names.size())
    throw DataError("dataset has " + std::to_string(data.num_features()) +
                    " features, model expects " + std::to_string(spec.feature_names.size()));
  for (std::size_t j = 0; j < spec.feature_names.size(); ++j)
    if (data.feature_names[j] != spec.feature_names[j])
      throw DataError("feature " + std::to_string(j + 1) + " is '" + data.feature_names[j] +
                      "', model expects '" + spec.feature_names[j] + "'");
  const bool ordinal_model = !model.flow().continuous();
  for (const auto& o : data.outcomes) {
    if (const auto* d = std::get_if<Discrete>(&o)) {
      if (!ordinal_model) throw DataError("discrete outcome given to a continuous model");
      if (d->level < 1 || d->level > spec.flow.levels)
        throw DataError("ordinal level " + std::to_string(d->level) + " outside 1.." +
                        std::to_string(spec.flow.levels));
    } else if (ordinal_model) {
      throw DataError("ordinal model requires discrete outcomes");
    }
  }
}

PreparedData prepare_data(const DriftModel& model, const Dataset& data) {
  check_compatible(model, data);
  PreparedData p;
  p.n_features = data.num_features();
  p.x.resize(data.size() * p.n_features);
  for (std::size_t i = 0; i < data.size(); ++i)
    model.standardizer().apply(data.row(i),
                               std::span<double>(p.x.data() + i * p.n_features, p.n_features));
  p.y = data.outcomes;
  return p;
}

std::vector<double> pointwise_loglik(const DriftModel& model, std::span<const double> params,
                                     const PreparedData& data, Extrapolation policy) {
  const auto bound = model.flow().bind<double>(params);
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    out[i] = loglik<double>(model, bound, data.y[i], data.row(i), 0.0, policy);
  return out;
}

Var nll(Tape& tape, const DriftModel& model, std::span<const Var> params,
        const PreparedData& data, std::span<const std::size_t> rows, const EvalContext& ctx,
        Extrapolation policy) {
  if (rows.empty()) throw DataError("negative log-likelihood of an empty subset");
  const auto bound = model.flow().bind<Var>(params);
  const Var zero = tape.lift(0.0);
  std::vector<Var> terms;
  terms.reserve(rows.size());
  for (auto r : rows) terms.push_back(loglik<Var>(model, bound, data.y[r], data.row(r), zero, policy, ctx));
  return sum(std::span<const Var>(terms)) * (-1.0 / static_cast<double>(rows.size()));
}

double nll_value(const DriftModel& model, std::span<const double> params,
                 const PreparedData& data, std::span<const std::size_t> rows,
                 Extrapolation policy) {
  if (rows.empty()) throw DataError("negative log-likelihood of an empty subset");
  const auto bound = model.flow().bind<double>(params);
  double s = 0.0;
  for (auto r : rows) s += loglik<double>(model, bound, data.y[r], data.row(r), 0.0, policy);
  return -s / static_cast<double>(rows.size());
}

NllGradient nll_and_gradient(const DriftModel& model, std::span<const double> params,
                             const PreparedData& data, std::span<const std::size_t> rows,
                             const EvalContext& ctx) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (double p : params) vars.push_back(tape.param(p));
  const Var loss = nll(tape, model, vars, data, rows, ctx);
  Gradient g = tape.backward(loss);
  return {loss.value(), std::move(g.by_param), g.finite && std::isfinite(loss.value())};
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

}  // namespace drift
