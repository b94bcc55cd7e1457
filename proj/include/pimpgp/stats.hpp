#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace pimpgp {

inline double mean_of(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of an empty sample");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

// Cross-run tables use the sample convention (n-1 denominator); a single
// observation reports 0 spread.
inline double sample_sd(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("sd of an empty sample");
  if (xs.size() == 1) return 0.0;
  const double m = mean_of(xs);
  double sum = 0.0;
  for (double x : xs) sum += (x - m) * (x - m);
  return std::sqrt(sum / static_cast<double>(xs.size() - 1));
}

// Within-generation spread over a full population (n denominator).
inline double population_sd(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("sd of an empty sample");
  const double m = mean_of(xs);
  double sum = 0.0;
  for (double x : xs) sum += (x - m) * (x - m);
  return std::sqrt(sum / static_cast<double>(xs.size()));
}

}  // namespace pimpgp
