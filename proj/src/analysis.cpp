#include "cryptolab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/QR>

#include "cryptolab/core/errors.hpp"
#include "cryptolab/core/stats.hpp"

namespace cryptolab {

namespace {

// Order statistic at fractional position (n-1)*q of the sorted values.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

BoxStats box_stats(std::span<const double> errors) {
  if (errors.empty()) throw ParameterError("box_stats: empty error list");
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  BoxStats s;
  s.min = sorted.front();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.max = sorted.back();
  return s;
}

double error_subtraction(double mae_multi, double mae_single) {
  if (!std::isfinite(mae_multi) || !std::isfinite(mae_single)) {
    throw ParameterError("error_subtraction: inputs must be finite");
  }
  return mae_multi - mae_single;
}

HysteresisReport hysteresis_diagnostic(std::span<const double> predictions,
                                       std::span<const double> truths,
                                       std::size_t max_lag, std::size_t ar_order) {
  if (predictions.size() != truths.size()) {
    throw ShapeError("hysteresis_diagnostic: sequences differ in length (" +
                     std::to_string(predictions.size()) + " vs " +
                     std::to_string(truths.size()) + ")");
  }
  if (max_lag < 1) throw ParameterError("hysteresis_diagnostic: max_lag must be >= 1");
  if (ar_order < 1) throw ParameterError("hysteresis_diagnostic: ar_order must be >= 1");
  const std::size_t n = predictions.size();
  if (n < max_lag + 10) {
    throw ParameterError("hysteresis_diagnostic: need at least max_lag + 10 = " +
                         std::to_string(max_lag + 10) + " points, got " +
                         std::to_string(n));
  }
  if (n < ar_order + 2) {
    throw ParameterError("hysteresis_diagnostic: too few points for the requested order");
  }
  if (population_variance(predictions) == 0.0 || population_variance(truths) == 0.0) {
    throw DiagnosticError("hysteresis_diagnostic: constant input, correlation undefined");
  }

  HysteresisReport report;
  report.lag_correlations.reserve(max_lag + 1);
  double best_r = -2.0;
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    // Pair prediction_t with truth_{t-lag}.
    const double r = pearson(predictions.subspan(lag), truths.subspan(0, n - lag));
    report.lag_correlations.push_back({lag, r});
    if (r > best_r) {  // strict: ties resolve to the smallest lag
      best_r = r;
      report.best_lag = lag;
    }
  }

  // prediction_t = w0 + w1*truth_{t-1} + .. + wp*truth_{t-p} + residual.
  const std::size_t p = ar_order;
  const Index rows = static_cast<Index>(n - p);
  Matrix design(rows, static_cast<Index>(p) + 1);
  Vector response(rows);
  for (Index row = 0; row < rows; ++row) {
    const std::size_t t = p + static_cast<std::size_t>(row);
    design(row, 0) = 1.0;
    for (std::size_t j = 1; j <= p; ++j) {
      design(row, static_cast<Index>(j)) = truths[t - j];
    }
    response(row) = predictions[t];
  }
  const Vector weights = design.colPivHouseholderQr().solve(response);
  report.ar_order = p;
  report.ar_weights.assign(weights.data(), weights.data() + weights.size());

  const Vector residuals = response - design * weights;
  report.residual_sigma =
      std::sqrt(residuals.squaredNorm() / static_cast<double>(rows));
  return report;
}

}  // namespace cryptolab
