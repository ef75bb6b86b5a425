// Small statistics helpers shared across modules.
#pragma once

#include <cmath>
#include <span>

#include "cryptolab/core/errors.hpp"

namespace cryptolab {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw ParameterError("mean: empty input");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

inline double population_variance(std::span<const double> xs) {
  const double m = mean(xs);
  double sum = 0.0;
  for (double x : xs) {
    const double d = x - m;
    sum += d * d;
  }
  return sum / static_cast<double>(xs.size());
}

inline double population_stddev(std::span<const double> xs) {
  return std::sqrt(population_variance(xs));
}

// Pearson correlation coefficient. Throws EstimationError when either input
// has zero variance.
inline double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("pearson: length mismatch");
  if (a.size() < 2) throw ParameterError("pearson: need at least two samples");
  const double ma = mean(a);
  const double mb = mean(b);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw EstimationError("pearson: degenerate variance");
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace cryptolab
