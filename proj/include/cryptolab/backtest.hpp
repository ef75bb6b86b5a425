#pragma once

// Walk-forward evaluation of one-step forecasters over a test span, in two
// protocols:
//
//   * point-to-point: every input window is built entirely from true data and
//     exactly one step is predicted, so each prediction's error is isolated
//     from the previous one;
//   * multi-point: the test span is tiled into segments `range` steps apart.
//     Each segment seeds a window of true data and then rolls forward `range`
//     steps, feeding every predicted close back into the window, so the error
//     compounds within a segment and resets at the next one.
//
// Errors are measured in normalized (percentage-of-window-base) space, where
// the reported magnitudes live; prices are denormalized only for plotting.
// Multi-point with range = 1 reproduces point-to-point error-for-error.

#include <cstdint>
#include <string>
#include <vector>

#include "cryptolab/core/types.hpp"
#include "cryptolab/data/ohlcv.hpp"
#include "cryptolab/data/windows.hpp"
#include "cryptolab/lstm.hpp"
#include "cryptolab/random_walk.hpp"

namespace cryptolab {

// A one-step forecaster: maps a normalized feature window to the normalized
// close one step past the window's end, relative to the window's close base.
class Predictor {
public:
  virtual ~Predictor() = default;
  virtual double predict(const Window& window) const = 0;
};

// Forecasts with a trained LSTM; the first readout component is the one-step
// close forecast.
class LstmPredictor final : public Predictor {
public:
  explicit LstmPredictor(LstmParams params);
  double predict(const Window& window) const override;

  const LstmParams& params() const { return params_; }

private:
  LstmParams params_;
};

// Forecasts with a random-walk model. The conditional mean x + drift maps to
// normalized space as (last normalized close) + drift / close_base, so with
// zero drift the forecast repeats the window's last close exactly.
class RandomWalkPredictor final : public Predictor {
public:
  explicit RandomWalkPredictor(RandomWalkModel model, Index close_column = 0);
  double predict(const Window& window) const override;

private:
  RandomWalkModel model_;
  Index close_column_;
};

struct PredictionMode {
  enum class Kind { PointToPoint, MultiPoint };
  Kind kind = Kind::PointToPoint;
  int range = 1;

  static PredictionMode point_to_point() { return {Kind::PointToPoint, 1}; }
  static PredictionMode multi_point(int range) { return {Kind::MultiPoint, range}; }
};

// One predicted point, denormalized for plotting. `index` is the position of
// the predicted value in the source series; `truth` is the true close there
// (in point-to-point mode reconstructed through the window encoding, so it
// can differ from the raw close in the last bits).
struct PredictionPoint {
  Index index = 0;
  double predicted = 0.0;
  double truth = 0.0;
};

struct BacktestReport {
  PredictionMode mode;
  int window_len = 0;
  std::vector<double> per_segment_errors;  // one normalized MAE per segment
  std::vector<double> pointwise_errors;    // every |error| in segment order
  double overall_mae = 0.0;                // mean of pointwise_errors
  std::vector<PredictionPoint> predictions;
  std::string asset;
  std::uint64_t seed = 0;  // stamped by the caller that owns the model's seed
};

// Predicts one step from every window in the set (each built from true data).
// Requires horizon >= 1; errors compare against the first target component.
// Throws ParameterError if the set is empty or has horizon < 1.
BacktestReport run_point_to_point(const Predictor& model, const WindowSet& test_windows);

// Segmented recursive forecasting over the raw test series, with segment
// starts at 0, range, 2*range, ... and partial trailing segments dropped.
// Predicted closes are fed back into the sliding window; the volume feature
// is held at the seed window's last true value for the whole rollout. Throws
// ParameterError if the series is shorter than window_len + range, and
// EstimationError if a fed-back price is not positive (the window encoding
// needs positive bases).
BacktestReport run_multi_point(const Predictor& model, const RawSeries& test_series,
                               int window_len, int range,
                               const std::vector<std::string>& features = {"close",
                                                                           "volume"});

}  // namespace cryptolab
