#pragma once

// Post-hoc analysis of backtest outputs: five-number error summaries for box
// plots, the multi-minus-single error gap, and a lag/autoregression probe
// that makes "the forecast is just a delayed copy of the truth" measurable.

#include <cstddef>
#include <span>
#include <vector>

#include "cryptolab/core/types.hpp"

namespace cryptolab {

struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Five-number summary with quartiles by linear interpolation of the order
// statistics at position (n-1)*q. Throws ParameterError on an empty list.
BoxStats box_stats(std::span<const double> errors);

// How much worse a multi-step backtest is than its single-step baseline.
// Throws ParameterError unless both values are finite.
double error_subtraction(double mae_multi, double mae_single);

struct LagCorrelation {
  std::size_t lag = 0;
  double r = 0.0;
};

struct HysteresisReport {
  // Lag L maximizing corr(prediction_t, truth_{t-L}); 0 means the forecast
  // tracks the truth with no delay, >= 1 means it trails it.
  std::size_t best_lag = 0;
  std::vector<LagCorrelation> lag_correlations;  // lags 0 .. max_lag
  std::size_t ar_order = 0;
  // Least-squares weights of prediction_t on [1, truth_{t-1}, ..,
  // truth_{t-p}]: ar_weights[0] is the intercept.
  std::vector<double> ar_weights;
  double residual_sigma = 0.0;  // root mean square regression residual
};

// Measures how far the prediction sequence lags the truth: Pearson
// correlation at every shift 0..max_lag (argmax with ties going to the
// smaller lag), plus an order-p autoregression of predictions on the
// preceding true values. Requires equal lengths >= max_lag + 10, max_lag >= 1
// and ar_order >= 1 (ParameterError otherwise); throws DiagnosticError when
// either sequence is constant, since correlation is undefined there.
HysteresisReport hysteresis_diagnostic(std::span<const double> predictions,
                                       std::span<const double> truths,
                                       std::size_t max_lag, std::size_t ar_order);

}  // namespace cryptolab
