#include "cryptolab/backtest.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>

#include "cryptolab/core/errors.hpp"

namespace cryptolab {

LstmPredictor::LstmPredictor(LstmParams params) : params_(std::move(params)) {
  params_.validate();
  if (params_.readout_dim() < 1) {
    throw ShapeError("LstmPredictor: readout must produce at least one value");
  }
}

double LstmPredictor::predict(const Window& window) const {
  return lstm_forward(params_, window.features).prediction(0);
}

RandomWalkPredictor::RandomWalkPredictor(RandomWalkModel model, Index close_column)
    : model_(model), close_column_(close_column) {
  if (close_column_ < 0) throw ParameterError("RandomWalkPredictor: bad close column");
}

double RandomWalkPredictor::predict(const Window& window) const {
  if (window.features.rows() < 1 || close_column_ >= window.features.cols()) {
    throw ShapeError("RandomWalkPredictor: window lacks the close column");
  }
  const double n_last = window.features(window.features.rows() - 1, close_column_);
  // x + drift in price space is n_last + drift/p0 in normalized space; the
  // drift-free case adds exactly 0 and repeats the last close bit-for-bit.
  return n_last + model_.drift() / window.close_base(close_column_);
}

BacktestReport run_point_to_point(const Predictor& model, const WindowSet& test_windows) {
  if (test_windows.windows.empty()) {
    throw ParameterError("run_point_to_point: empty window set");
  }
  if (test_windows.horizon < 1) {
    throw ParameterError("run_point_to_point: windows carry no target to score");
  }
  const Index close_col = test_windows.close_column();

  BacktestReport report;
  report.mode = PredictionMode::point_to_point();
  report.window_len = test_windows.window_len;
  report.asset = test_windows.asset;
  report.per_segment_errors.reserve(test_windows.size());
  report.pointwise_errors.reserve(test_windows.size());
  report.predictions.reserve(test_windows.size());

  double error_sum = 0.0;
  for (const Window& w : test_windows.windows) {
    const double predicted = model.predict(w);
    const double target = w.target(0);
    const double err = std::abs(predicted - target);
    report.per_segment_errors.push_back(err);
    report.pointwise_errors.push_back(err);
    error_sum += err;

    const double p0 = w.close_base(close_col);
    report.predictions.push_back({w.start_index + test_windows.window_len,
                                  denormalize(predicted, p0), denormalize(target, p0)});
  }
  report.overall_mae = error_sum / static_cast<double>(report.pointwise_errors.size());
  return report;
}

BacktestReport run_multi_point(const Predictor& model, const RawSeries& test_series,
                               int window_len, int range,
                               const std::vector<std::string>& features) {
  if (window_len < 1) throw ParameterError("run_multi_point: window_len must be >= 1");
  if (range < 1) throw ParameterError("run_multi_point: range must be >= 1");
  const std::size_t len = test_series.records.size();
  const std::size_t needed = static_cast<std::size_t>(window_len) + range;
  if (len < needed) {
    throw ParameterError("run_multi_point: series has " + std::to_string(len) +
                         " records, needs at least " + std::to_string(needed));
  }

  const Index n_features = static_cast<Index>(features.size());
  Index close_col = -1;
  for (Index f = 0; f < n_features; ++f) {
    if (features[f] == "close") close_col = f;
  }
  if (close_col < 0) {
    throw ParameterError("run_multi_point: feature list must include close");
  }
  std::vector<std::vector<double>> columns(features.size());
  for (std::size_t f = 0; f < features.size(); ++f) {
    columns[f] = test_series.feature_column(features[f]);
  }

  BacktestReport report;
  report.mode = PredictionMode::multi_point(range);
  report.window_len = window_len;
  report.asset = test_series.asset;

  const std::size_t w_len = static_cast<std::size_t>(window_len);
  double error_sum = 0.0;
  for (std::size_t s = 0; s + w_len + range <= len; s += range) {
    // Price-space rolling buffers, seeded from true data; non-close features
    // are frozen at their last true value once the rollout starts.
    std::vector<std::vector<double>> buffer(features.size());
    std::vector<double> held(features.size());
    for (std::size_t f = 0; f < features.size(); ++f) {
      buffer[f].assign(columns[f].begin() + s, columns[f].begin() + s + w_len);
      held[f] = columns[f][s + w_len - 1];
    }

    double segment_sum = 0.0;
    for (int j = 0; j < range; ++j) {
      Window w;
      w.features.resize(window_len, n_features);
      w.base_values.resize(n_features);
      w.start_index = static_cast<Index>(s) + j;
      for (Index f = 0; f < n_features; ++f) {
        const double base = buffer[f][0];
        if (!(base > 0.0)) {
          throw DataError("run_multi_point: non-positive normalization base for " +
                          features[f] + " at series index " +
                          std::to_string(s + static_cast<std::size_t>(j)));
        }
        normalize_column(buffer[f], base, w.features, f);
        w.base_values[f] = base;
      }

      const double p0 = w.base_values[close_col];
      const std::size_t truth_index = s + w_len + static_cast<std::size_t>(j);
      const double true_close = columns[close_col][truth_index];
      const double n_true = normalized_value(true_close, p0);
      w.target.resize(1);
      w.target(0) = n_true;

      const double predicted = model.predict(w);
      const double err = std::abs(predicted - n_true);
      report.pointwise_errors.push_back(err);
      segment_sum += err;
      error_sum += err;

      const double price_hat = denormalize(predicted, p0);
      if (!(price_hat > 0.0)) {
        throw EstimationError("run_multi_point: fed-back price is not positive at index " +
                              std::to_string(truth_index));
      }
      report.predictions.push_back({static_cast<Index>(truth_index), price_hat, true_close});

      for (std::size_t f = 0; f < features.size(); ++f) {
        buffer[f].erase(buffer[f].begin());
        buffer[f].push_back(f == static_cast<std::size_t>(close_col) ? price_hat : held[f]);
      }
    }
    report.per_segment_errors.push_back(segment_sum / static_cast<double>(range));
  }
  report.overall_mae = error_sum / static_cast<double>(report.pointwise_errors.size());
  return report;
}

}  // namespace cryptolab
