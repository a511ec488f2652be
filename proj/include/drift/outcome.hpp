#pragma once

#include <limits>
#include <variant>

#include "drift/errors.hpp"

namespace drift {

struct Exact {
  double y;
};

// Ordinal level, 1-based.
struct Discrete {
  int level;
};

// (lo, hi] with lo = -inf (left-censored) or hi = +inf (right-censored)
// allowed.
struct Interval {
  double lo;
  double hi;
};

using Outcome = std::variant<Exact, Discrete, Interval>;

class EmptyInterval : public DomainError {
 public:
  EmptyInterval() : DomainError("interval outcome requires lo < hi") {}
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline Interval make_interval(double lo, double hi) {
  if (!(lo < hi)) throw EmptyInterval();
  return {lo, hi};
}

// Event at t -> Exact(t); censored at t -> (t, +inf).
inline Outcome survival_outcome(double time, bool event) {
  if (event) return Exact{time};
  return Interval{time, kInf};
}

enum class OutcomeKind { Continuous, Ordinal, Survival, Interval };

}  // namespace drift
