#include "drift/predictors.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

#include "drift/errors.hpp"

namespace drift {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::size_t feature_index(const std::string& name,
                          std::span<const std::string> names) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError("unknown feature '" + name + "' in predictor");
  return static_cast<std::size_t>(it - names.begin());
}

std::vector<int> parse_widths(const std::string& text, const std::string& item) {
  std::vector<int> widths;
  for (const auto& w : split(text, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(w, &used);
      if (used != w.size() || v < 1) throw std::invalid_argument(w);
      widths.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bad layer width '" + w + "' in '" + item + "'");
    }
  }
  return widths;
}

// Hidden ReLU stack with a bias on the last hidden layer only, followed by
// a linear output layer without bias.
std::vector<DenseLayer> basis_net(const std::vector<int>& hidden, int outputs,
                                  std::size_t& offset) {
  std::vector<DenseLayer> layers;
  int in = 1;
  for (std::size_t k = 0; k < hidden.size(); ++k) {
    DenseLayer l{in, hidden[k], k + 1 == hidden.size(), true, 0.0, offset};
    offset += l.num_params();
    layers.push_back(l);
    in = hidden[k];
  }
  DenseLayer out{in, outputs, false, false, 0.0, offset};
  offset += out.num_params();
  layers.push_back(out);
  return layers;
}

void init_layers(std::span<const DenseLayer> layers, std::span<double> params,
                 Rng& rng) {
  for (const auto& l : layers) {
    const double b = glorot_bound(l.in, l.out);
    const std::size_t nw = static_cast<std::size_t>(l.in) * static_cast<std::size_t>(l.out);
    for (std::size_t i = 0; i < nw; ++i) params[l.offset + i] = uniform(rng, -b, b);
    if (l.bias)
      for (int j = 0; j < l.out; ++j) params[l.offset + nw + static_cast<std::size_t>(j)] = 0.0;
  }
}

bool allowed_deep_widths(const std::vector<int>& w) {
  static const std::vector<std::vector<int>> menu = {{100}, {100, 100}, {20}, {20, 20}};
  return std::find(menu.begin(), menu.end(), w) != menu.end();
}

}  // namespace

bool operator==(const TermSpec& a, const TermSpec& b) {
  return a.kind == b.kind && a.features == b.features && a.hidden == b.hidden;
}

std::vector<TermSpec> parse_terms(std::span<const std::string> items,
                                  std::span<const std::string> feature_names) {
  std::vector<TermSpec> terms;
  for (const auto& raw : items) {
    const std::string item = trim(raw);
    if (item == "intercept") {
      terms.push_back({TermKind::Intercept, {}, {}});
      continue;
    }
    const auto open = item.find('(');
    if (open == std::string::npos || item.back() != ')')
      throw ConfigError("cannot parse predictor term '" + item + "'");
    const std::string name = trim(std::string_view(item).substr(0, open));
    std::string inner = item.substr(open + 1, item.size() - open - 2);
    std::string widths_text;
    if (const auto semi = inner.find(';'); semi != std::string::npos) {
      widths_text = trim(std::string_view(inner).substr(semi + 1));
      inner = inner.substr(0, semi);
    }
    const auto args = split(inner, ',');
    const bool all = args.size() == 1 && args[0] == "*";

    if (name == "linear" || name == "nbf") {
      const TermKind kind = name == "linear" ? TermKind::Linear : TermKind::NeuralBasis;
      std::vector<int> hidden;
      if (kind == TermKind::NeuralBasis)
        hidden = widths_text.empty() ? kNeuralBasisDefault : parse_widths(widths_text, item);
      else if (!widths_text.empty())
        throw ConfigError("linear term takes no widths: '" + item + "'");
      if (all) {
        for (std::size_t j = 0; j < feature_names.size(); ++j)
          terms.push_back({kind, {j}, hidden});
      } else {
        if (args.size() != 1) throw ConfigError("'" + item + "' needs exactly one feature");
        terms.push_back({kind, {feature_index(args[0], feature_names)}, hidden});
      }
    } else if (name == "bivariate") {
      if (args.size() != 2 || all)
        throw ConfigError("'" + item + "' needs exactly two features");
      const auto i = feature_index(args[0], feature_names);
      const auto j = feature_index(args[1], feature_names);
      if (i == j) throw ConfigError("bivariate term needs two distinct features");
      terms.push_back({TermKind::Bivariate, {i, j},
                       widths_text.empty() ? kNeuralBasisDefault
                                           : parse_widths(widths_text, item)});
    } else if (name == "deep") {
      std::vector<std::size_t> feats;
      if (all) {
        feats.resize(feature_names.size());
        std::iota(feats.begin(), feats.end(), std::size_t{0});
      } else {
        for (const auto& a : args) feats.push_back(feature_index(a, feature_names));
      }
      auto hidden = widths_text.empty() ? std::vector<int>{100} : parse_widths(widths_text, item);
      if (!allowed_deep_widths(hidden))
        throw ConfigError("deep term widths must be one of 100 | 100,100 | 20 | 20,20: '" +
                          item + "'");
      terms.push_back({TermKind::Deep, feats, hidden});
    } else {
      throw ConfigError("unknown predictor term '" + name + "'");
    }
  }
  return terms;
}

std::string format_term(const TermSpec& term, std::span<const std::string> names) {
  auto widths = [&] {
    std::ostringstream os;
    for (std::size_t k = 0; k < term.hidden.size(); ++k) os << (k ? "," : "") << term.hidden[k];
    return os.str();
  };
  auto fname = [&](std::size_t j) {
    return j < names.size() ? names[j] : "x" + std::to_string(j);
  };
  switch (term.kind) {
    case TermKind::Intercept: return "intercept";
    case TermKind::Linear: return "linear(" + fname(term.features[0]) + ")";
    case TermKind::NeuralBasis:
      return "nbf(" + fname(term.features[0]) + "; " + widths() + ")";
    case TermKind::Bivariate:
      return "bivariate(" + fname(term.features[0]) + "," + fname(term.features[1]) +
             "; " + widths() + ")";
    case TermKind::Deep: {
      std::string s = "deep(";
      if (term.features.size() == names.size() && !names.empty()) {
        s += "*";
      } else {
        for (std::size_t i = 0; i < term.features.size(); ++i)
          s += (i ? "," : "") + fname(term.features[i]);
      }
      return s + "; " + widths() + ")";
    }
  }
  return "?";
}

Term::Term(TermSpec spec) : spec_(std::move(spec)) {
  std::size_t offset = 0;
  switch (spec_.kind) {
    case TermKind::Intercept:
      break;
    case TermKind::Linear:
      offset = 1;
      break;
    case TermKind::NeuralBasis:
      net_a_ = basis_net(spec_.hidden, 1, offset);
      break;
    case TermKind::Bivariate:
      net_a_ = basis_net(spec_.hidden, kBivariateEmbedding, offset);
      net_b_ = basis_net(spec_.hidden, kBivariateEmbedding, offset);
      head_offset_ = offset;
      offset += kBivariateEmbedding * kBivariateEmbedding;
      break;
    case TermKind::Deep: {
      int in = static_cast<int>(spec_.features.size());
      for (int w : spec_.hidden) {
        DenseLayer l{in, w, true, true, kDeepDropout, offset};
        offset += l.num_params();
        net_a_.push_back(l);
        in = w;
      }
      DenseLayer out{in, 1, true, false, 0.0, offset};
      offset += out.num_params();
      net_a_.push_back(out);
      break;
    }
  }
  if (spec_.kind == TermKind::Intercept) offset = 1;
  n_params_ = offset;
}

void Term::init(std::span<double> params, Rng& rng) const {
  switch (spec_.kind) {
    case TermKind::Intercept:
    case TermKind::Linear:
      params[0] = 0.0;
      break;
    case TermKind::NeuralBasis:
    case TermKind::Deep:
      init_layers(net_a_, params, rng);
      break;
    case TermKind::Bivariate: {
      init_layers(net_a_, params, rng);
      init_layers(net_b_, params, rng);
      const int n = kBivariateEmbedding * kBivariateEmbedding;
      const double b = glorot_bound(n, 1);
      for (int i = 0; i < n; ++i) params[head_offset_ + static_cast<std::size_t>(i)] = uniform(rng, -b, b);
      break;
    }
  }
}

Predictor::Predictor(std::vector<TermSpec> terms, std::size_t n_features,
                     OutputTransform transform)
    : n_features_(n_features), transform_(transform) {
  for (auto& spec : terms) {
    for (auto f : spec.features)
      if (f >= n_features) throw ConfigError("predictor term refers to feature out of range");
    offsets_.push_back(n_params_);
    terms_.emplace_back(std::move(spec));
    n_params_ += terms_.back().num_params();
  }
}

std::vector<TermSpec> Predictor::term_specs() const {
  std::vector<TermSpec> out;
  for (const auto& t : terms_) out.push_back(t.spec());
  return out;
}

void Predictor::check_dimension(std::span<const double> x) const {
  if (x.size() != n_features_)
    throw DataError("feature dimension mismatch: predictor expects " +
                    std::to_string(n_features_) + ", got " + std::to_string(x.size()));
}

std::vector<double> Predictor::partial_effect(std::span<const double> params,
                                              std::size_t term,
                                              std::span<const double> grid) const {
  if (term >= terms_.size()) throw ConfigError("partial effect: term index out of range");
  const Term& t = terms_[term];
  if (!t.univariate()) throw ConfigError("partial effect requires a linear or nbf term");
  const auto slice = params.subspan(offsets_[term], t.num_params());
  std::vector<double> x(n_features_, 0.0);
  std::vector<double> curve;
  curve.reserve(grid.size());
  for (double g : grid) {
    x[t.spec().features[0]] = g;
    curve.push_back(t.eval<double>(slice, x, {}));
  }
  if (curve.empty()) return curve;
  const double mean =
      std::accumulate(curve.begin(), curve.end(), 0.0) / static_cast<double>(curve.size());
  for (auto& c : curve) c -= mean;
  return curve;
}

void Predictor::init(std::span<double> params, Rng& rng) const {
  for (std::size_t t = 0; t < terms_.size(); ++t)
    terms_[t].init(params.subspan(offsets_[t], terms_[t].num_params()), rng);
}

}  // namespace drift
