#pragma once

// Additive predictors psi(x) = sum_j rho_j(x) built from structured
// (intercept, linear), neural-basis, bivariate and deep terms.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "drift/diffcore.hpp"
#include "drift/init.hpp"

namespace drift {

enum class TermKind { Intercept, Linear, NeuralBasis, Bivariate, Deep };

struct TermSpec {
  TermKind kind = TermKind::Intercept;
  std::vector<std::size_t> features;
  // Hidden widths of the network terms (empty for structured terms).
  std::vector<int> hidden;
};

bool operator==(const TermSpec& a, const TermSpec& b);

inline const std::vector<int> kNeuralBasisDefault = {64, 64, 32};
constexpr int kBivariateEmbedding = 5;
constexpr double kDeepDropout = 0.1;

// Grammar, one term per entry:
//   intercept | linear(x) | nbf(x) | nbf(x; 16,16) | bivariate(x,z)
//   | bivariate(x,z; 16,16) | deep(*) | deep(*; 100,100)
// `linear(*)` and `nbf(*)` expand to one term per feature. Deep widths must
// be one of {100}, {100,100}, {20}, {20,20}.
std::vector<TermSpec> parse_terms(std::span<const std::string> items,
                                  std::span<const std::string> feature_names);
std::string format_term(const TermSpec& term,
                        std::span<const std::string> feature_names);

struct DenseLayer {
  int in = 0;
  int out = 0;
  bool bias = false;
  bool relu = false;
  double dropout = 0.0;  // applied to this layer's output while training
  std::size_t offset = 0;

  std::size_t num_params() const {
    return static_cast<std::size_t>(in) * static_cast<std::size_t>(out) +
           (bias ? static_cast<std::size_t>(out) : 0);
  }
};

// Non-null rng switches deep terms into training mode (dropout active).
struct EvalContext {
  Rng* dropout_rng = nullptr;
};

namespace detail {

template <class S, class In>
std::vector<S> dense_forward(const DenseLayer& layer, std::span<const S> params,
                             std::span<const In> input, const EvalContext& ctx) {
  std::vector<S> out;
  out.reserve(static_cast<std::size_t>(layer.out));
  const auto in = static_cast<std::size_t>(layer.in);
  const std::size_t bias_at = layer.offset + in * static_cast<std::size_t>(layer.out);
  for (std::size_t j = 0; j < static_cast<std::size_t>(layer.out); ++j) {
    const auto row = params.subspan(layer.offset + j * in, in);
    const S* bias = layer.bias ? &params[bias_at + j] : nullptr;
    S pre = dot(row, input, bias);
    if (layer.relu) pre = relu(pre);
    if (layer.dropout > 0.0 && ctx.dropout_rng != nullptr) {
      const bool keep = uniform(*ctx.dropout_rng, 0.0, 1.0) >= layer.dropout;
      pre = pre * (keep ? 1.0 / (1.0 - layer.dropout) : 0.0);
    }
    out.push_back(pre);
  }
  return out;
}

template <class S, class In>
std::vector<S> mlp_forward(std::span<const DenseLayer> layers,
                           std::span<const S> params, std::span<const In> input,
                           const EvalContext& ctx) {
  std::vector<S> z = dense_forward<S, In>(layers.front(), params, input, ctx);
  for (std::size_t k = 1; k < layers.size(); ++k)
    z = dense_forward<S, S>(layers[k], params, std::span<const S>(z), ctx);
  return z;
}

}  // namespace detail

class Term {
 public:
  explicit Term(TermSpec spec);

  const TermSpec& spec() const { return spec_; }
  std::size_t num_params() const { return n_params_; }
  bool univariate() const {
    return spec_.kind == TermKind::Linear || spec_.kind == TermKind::NeuralBasis;
  }

  // `params` is this term's slice; `x` the full standardized feature row.
  template <class S>
  S eval(std::span<const S> params, std::span<const double> x,
         const EvalContext& ctx) const;

  void init(std::span<double> params, Rng& rng) const;

 private:
  TermSpec spec_;
  std::vector<DenseLayer> net_a_;  // NBF / first bivariate arm / deep
  std::vector<DenseLayer> net_b_;  // second bivariate arm
  std::size_t head_offset_ = 0;    // bivariate tensor-product head
  std::size_t n_params_ = 0;
};

enum class OutputTransform { Identity, Exp };

class Predictor {
 public:
  Predictor() = default;
  Predictor(std::vector<TermSpec> terms, std::size_t n_features,
            OutputTransform transform);

  std::size_t num_params() const { return n_params_; }
  std::size_t num_features() const { return n_features_; }
  bool empty() const { return terms_.empty(); }
  OutputTransform transform() const { return transform_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t term_offset(std::size_t t) const { return offsets_.at(t); }
  std::vector<TermSpec> term_specs() const;

  // Additive predictor before the output transform. Requires !empty().
  template <class S>
  S eval_additive(std::span<const S> params, std::span<const double> x,
                  const EvalContext& ctx = {}) const;

  template <class S>
  S eval(std::span<const S> params, std::span<const double> x,
         const EvalContext& ctx = {}) const {
    S eta = eval_additive(params, x, ctx);
    if (transform_ == OutputTransform::Exp) return exp(eta);
    return eta;
  }

  // rho_t on a grid of values of its feature, minus the grid mean.
  std::vector<double> partial_effect(std::span<const double> params,
                                     std::size_t term,
                                     std::span<const double> grid) const;

  void init(std::span<double> params, Rng& rng) const;

 private:
  void check_dimension(std::span<const double> x) const;

  std::vector<Term> terms_;
  std::vector<std::size_t> offsets_;
  std::size_t n_features_ = 0;
  std::size_t n_params_ = 0;
  OutputTransform transform_ = OutputTransform::Identity;
};

// ---------------------------------------------------------------------------

template <class S>
S Term::eval(std::span<const S> params, std::span<const double> x,
             const EvalContext& ctx) const {
  switch (spec_.kind) {
    case TermKind::Intercept:
      return params[0];
    case TermKind::Linear:
      return params[0] * x[spec_.features[0]];
    case TermKind::NeuralBasis: {
      const double in = x[spec_.features[0]];
      auto out = detail::mlp_forward<S, double>(net_a_, params,
                                                std::span<const double>(&in, 1), ctx);
      return out[0];
    }
    case TermKind::Bivariate: {
      const double in_a = x[spec_.features[0]];
      const double in_b = x[spec_.features[1]];
      auto a = detail::mlp_forward<S, double>(net_a_, params,
                                              std::span<const double>(&in_a, 1), ctx);
      auto b = detail::mlp_forward<S, double>(net_b_, params,
                                              std::span<const double>(&in_b, 1), ctx);
      std::vector<S> outer;
      outer.reserve(a.size() * b.size());
      for (const auto& ai : a)
        for (const auto& bj : b) outer.push_back(ai * bj);
      return dot(params.subspan(head_offset_, outer.size()),
                 std::span<const S>(outer));
    }
    case TermKind::Deep: {
      std::vector<double> in(spec_.features.size());
      for (std::size_t i = 0; i < in.size(); ++i) in[i] = x[spec_.features[i]];
      auto out = detail::mlp_forward<S, double>(net_a_, params,
                                                std::span<const double>(in), ctx);
      return out[0];
    }
  }
  return params[0];
}

template <class S>
S Predictor::eval_additive(std::span<const S> params, std::span<const double> x,
                           const EvalContext& ctx) const {
  check_dimension(x);
  if (terms_.empty()) throw Error("empty predictor has no additive value");
  if (terms_.size() == 1)
    return terms_[0].eval(params.subspan(offsets_[0], terms_[0].num_params()), x, ctx);
  std::vector<S> outs;
  outs.reserve(terms_.size());
  for (std::size_t t = 0; t < terms_.size(); ++t)
    outs.push_back(
        terms_[t].eval(params.subspan(offsets_[t], terms_[t].num_params()), x, ctx));
  return sum(std::span<const S>(outs));
}

}  // namespace drift
