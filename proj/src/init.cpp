#include "drift/init.hpp"

#include <algorithm>
#include <cmath>

#include "drift/errors.hpp"

namespace drift {

InitScheme parse_init_scheme(std::string_view name) {
  if (name == "xavier") return InitScheme::XavierPositive;
  if (name == "variance") return InitScheme::VariancePreservingPositive;
  if (name == "maxfan") return InitScheme::MaxFanPositive;
  throw ConfigError("unknown init scheme '" + std::string(name) +
                    "' (expected xavier, variance or maxfan)");
}

std::string_view to_string(InitScheme scheme) {
  switch (scheme) {
    case InitScheme::XavierPositive: return "xavier";
    case InitScheme::VariancePreservingPositive: return "variance";
    case InitScheme::MaxFanPositive: return "maxfan";
  }
  return "?";
}

double positive_init_bound(InitScheme scheme, int fan_in, int fan_out) {
  const double sum = static_cast<double>(fan_in + fan_out);
  switch (scheme) {
    case InitScheme::XavierPositive: return std::sqrt(6.0 / sum);
    case InitScheme::VariancePreservingPositive: return std::sqrt(3.0 / sum);
    // sqrt(9 / max^2) == 3 / max
    case InitScheme::MaxFanPositive: return 3.0 / std::max(fan_in, fan_out);
  }
  return 0.0;
}

double glorot_bound(int fan_in, int fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace drift
