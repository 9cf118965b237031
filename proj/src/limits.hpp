#pragma once

#include <algorithm>
#include <cmath>

namespace edgeplan::detail {

/// `value <= limit` up to a relative tolerance for accumulated rounding.
inline bool WithinLimit(double value, double limit) {
  return value <= limit + 1e-9 * std::max(1.0, std::abs(limit));
}

}  // namespace edgeplan::detail
