#include "drift/flows.hpp"

#include <algorithm>
#include <cmath>

namespace drift {

MonotoneNetFlow::MonotoneNetFlow(std::vector<int> hidden, double input_shift,
                                 double input_scale)
    : hidden_(std::move(hidden)), input_shift_(input_shift), input_scale_(input_scale) {
  if (!(input_scale_ > 0.0) || !std::isfinite(input_scale_) || !std::isfinite(input_shift_))
    throw ConfigError("monotone net input scaling must be finite with positive scale");
  widths_.push_back(1);
  for (int w : hidden_) {
    if (w < 1) throw ConfigError("monotone net hidden widths must be positive");
    widths_.push_back(w);
  }
  widths_.push_back(1);
  for (std::size_t k = 0; k + 1 < widths_.size(); ++k) {
    offsets_.push_back(n_params_);
    const auto in = static_cast<std::size_t>(widths_[k]);
    const auto out = static_cast<std::size_t>(widths_[k + 1]);
    n_params_ += in * out + out;
  }
}

std::vector<std::vector<double>> MonotoneNetFlow::activations(std::span<const double> params,
                                                              double y) const {
  const auto p = prepare<double>(params);
  std::vector<std::vector<double>> acts;
  acts.push_back({(y - input_shift_) / input_scale_});
  for (std::size_t k = 0; k < num_layers(); ++k) {
    const auto in = static_cast<std::size_t>(widths_[k]);
    const auto out = static_cast<std::size_t>(widths_[k + 1]);
    const auto& prev = acts.back();
    std::vector<double> next(out);
    for (std::size_t j = 0; j < out; ++j) {
      double pre = p.biases[k][j];
      for (std::size_t i = 0; i < in; ++i) pre += p.weights[k][j * in + i] * prev[i];
      next[j] = (k + 1 == num_layers()) ? pre : std::tanh(pre);
    }
    acts.push_back(std::move(next));
  }
  return acts;
}

void MonotoneNetFlow::init(std::span<double> params, InitScheme scheme, Rng& rng) const {
  for (std::size_t k = 0; k < num_layers(); ++k) {
    const int fan_in = widths_[k];
    const int fan_out = widths_[k + 1];
    const double bound = positive_init_bound(scheme, fan_in, fan_out);
    const auto n = static_cast<std::size_t>(fan_in) * static_cast<std::size_t>(fan_out);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = uniform(rng, 0.0, bound);
      // Draws at or below the floor map to the smallest representable raw.
      params[offsets_[k] + i] = softplus_inv(std::max(w - kWeightFloor, 1e-300));
    }
    for (int j = 0; j < fan_out; ++j) params[offsets_[k] + n + static_cast<std::size_t>(j)] = 0.0;
  }
}

std::vector<double> bernstein_basis(int order, double t) {
  std::vector<double> b(static_cast<std::size_t>(order) + 1);
  const double s = 1.0 - t;
  double binom = 1.0;
  for (int m = 0; m <= order; ++m) {
    b[static_cast<std::size_t>(m)] = binom * std::pow(t, m) * std::pow(s, order - m);
    binom = binom * static_cast<double>(order - m) / static_cast<double>(m + 1);
  }
  return b;
}

BernsteinFlow::BernsteinFlow(int order, double lo, double hi)
    : order_(order), lo_(lo), hi_(hi) {
  if (order_ < 1) throw ConfigError("Bernstein order must be at least 1");
  if (!(lo_ < hi_) || !std::isfinite(lo_) || !std::isfinite(hi_))
    throw ConfigError("Bernstein domain requires finite lo < hi");
}

std::vector<double> BernsteinFlow::raw_from_theta(std::span<const double> theta) {
  std::vector<double> raw(theta.size());
  if (theta.empty()) return raw;
  raw[0] = theta[0];
  for (std::size_t m = 1; m < theta.size(); ++m) {
    const double gap = theta[m] - theta[m - 1];
    if (!(gap > 0.0)) throw DomainError("Bernstein coefficients must be strictly increasing");
    raw[m] = softplus_inv(gap);
  }
  return raw;
}

void BernsteinFlow::init(std::span<double> params, const BaseDistribution& base) const {
  std::vector<double> theta(num_params());
  for (std::size_t m = 0; m < theta.size(); ++m)
    theta[m] = base.quantile((static_cast<double>(m) + 0.5) / static_cast<double>(theta.size()));
  const auto raw = raw_from_theta(theta);
  std::copy(raw.begin(), raw.end(), params.begin());
}

OrdinalCutpoints::OrdinalCutpoints(int levels) : levels_(levels) {
  if (levels_ < 2) throw ConfigError("ordinal flow needs at least 2 levels");
}

void OrdinalCutpoints::init(std::span<double> params, const BaseDistribution& base) const {
  if (num_params() == 0) return;
  std::vector<double> theta(num_params());
  for (std::size_t k = 0; k < theta.size(); ++k)
    theta[k] = base.quantile(static_cast<double>(k + 1) / static_cast<double>(levels_));
  params[0] = theta[0];
  for (std::size_t k = 1; k < theta.size(); ++k)
    params[k] = softplus_inv(theta[k] - theta[k - 1] - kGapFloor);
}

ConditionalInverseFlow::ConditionalInverseFlow(ReferenceFlow reference, Predictor location,
                                               std::optional<Predictor> scale)
    : reference_(std::move(reference)), location_(std::move(location)), scale_(std::move(scale)) {
  if (scale_ && scale_->transform() != OutputTransform::Exp)
    throw ConfigError("scale predictor must use the exp output transform");
  if (scale_ && scale_->num_features() != location_.num_features())
    throw ConfigError("location and scale predictors disagree on feature count");
  loc_offset_ = drift::num_params(reference_);
  scale_offset_ = loc_offset_ + location_.num_params();
  n_params_ = scale_offset_ + (scale_ ? scale_->num_params() : 0);
}

std::uint64_t ConditionalInverseFlow::clamp_count() const {
  if (const auto* b = std::get_if<BernsteinFlow>(&reference_)) return b->clamp_counter().count();
  return 0;
}

double ConditionalInverseFlow::invert_h(std::span<const double> params,
                                        std::span<const double> x, double target) const {
  if (!continuous()) throw DomainError("invert_h requires a continuous reference flow");
  if (!std::isfinite(target)) throw BracketError("invert_h: non-finite target");
  const auto b = bind<double>(params);
  const auto ls = loc_scale<double>(b, x);
  auto h = [&](double y) { return eval_h<double>(b, y, ls).h; };

  double lo = 0.0;
  double hi = 0.0;
  if (const auto* bern = std::get_if<BernsteinFlow>(&reference_)) {
    lo = bern->lo();
    hi = bern->hi();
    if (target < h(lo) || target > h(hi))
      throw BracketError("target outside the range of the Bernstein flow on its domain");
  } else {
    const auto& net = std::get<MonotoneNetFlow>(reference_);
    bool enclosed = false;
    for (int k = 0; k <= 60 && !enclosed; ++k) {
      const double half = net.input_scale() * std::ldexp(1.0, k);
      lo = net.input_shift() - half;
      hi = net.input_shift() + half;
      enclosed = h(lo) <= target && target <= h(hi);
    }
    if (!enclosed)
      throw BracketError("target outside the (bounded) range of the monotone net flow");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double v = h(mid);
    if (v == target) return mid;
    if (v < target) lo = mid;
    else hi = mid;
    if (hi - lo <= 1e-14 * (1.0 + std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace drift
