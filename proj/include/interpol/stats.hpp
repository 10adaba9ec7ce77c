#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace interpol {

/// Two-sided standard normal quantiles.
inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ99 = 2.5758293035489004;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion. Well behaved for
/// proportions near 0, which is where acceptance rates of forgeries sit.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ99) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace interpol
