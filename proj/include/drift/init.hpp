#pragma once

#include <random>
#include <string>
#include <string_view>

namespace drift {

using Rng = std::mt19937_64;

// Initialization laws for positive-weight (monotone) layers.
//   XavierPositive              w ~ U(0, sqrt(6 / (fan_in + fan_out)))
//   VariancePreservingPositive  w ~ U(0, sqrt(3 / (fan_in + fan_out)))
//   MaxFanPositive              w ~ U(0, 3 / max(fan_in, fan_out))
enum class InitScheme { XavierPositive, VariancePreservingPositive, MaxFanPositive };

// Accepts "xavier", "variance" and "maxfan".
InitScheme parse_init_scheme(std::string_view name);
std::string_view to_string(InitScheme scheme);

double positive_init_bound(InitScheme scheme, int fan_in, int fan_out);

// Symmetric Glorot bound sqrt(6 / (fan_in + fan_out)) for unconstrained layers.
double glorot_bound(int fan_in, int fan_out);

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace drift
