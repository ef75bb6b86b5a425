#pragma once

// Experiment configuration and the grid sweep that produces the headline
// result tables: mean test MAE per (asset, window length, prediction range,
// seed) cell, aggregated into a fixed-window matrix (MAE vs prediction
// range), a fixed-range matrix (MAE vs window length), and the gap of every
// multi-step column over the single-step baseline.

#include <cstdint>
#include <string>
#include <vector>

#include "cryptolab/core/types.hpp"
#include "cryptolab/data/ohlcv.hpp"
#include "cryptolab/random_walk.hpp"
#include "cryptolab/train.hpp"

namespace cryptolab {

struct AssetSpec {
  std::string name;
  std::string data_path;  // resolved against the config file's directory
};

enum class ModelKind { Lstm, RandomWalk };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);
std::string to_string(DriftMode mode);
DriftMode drift_mode_from_string(const std::string& name);

struct ExperimentConfig {
  std::vector<AssetSpec> assets;
  double train_fraction = 0.8;
  std::vector<int> window_lengths;
  std::vector<int> prediction_ranges;
  // The two slices reported as matrices: MAE over ranges at fixed_window, and
  // MAE over window lengths at fixed_range. Both must appear in the lists.
  int fixed_window = 0;
  int fixed_range = 0;
  ModelKind model = ModelKind::Lstm;
  std::vector<std::string> features = {"close", "volume"};
  DriftMode drift_mode = DriftMode::Zero;  // random-walk predictor only
  int hidden_size = 32;                    // LSTM only
  TrainConfig train;                       // per-cell seed overrides train.seed
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";          // resolved against the config dir
  std::string checkpoint_path;             // optional pre-trained model

  void validate() const;
};

// Reads a JSON config file. Unknown keys are rejected so typos fail loudly;
// every relative path is resolved against the directory containing the file.
// Throws FileError if unreadable and SchemaError on malformed content.
ExperimentConfig load_experiment_config(const std::string& path);

// One backtest outcome. A failed cell carries the error text instead of a
// value; other cells are unaffected.
struct GridCell {
  std::string asset;
  int window_len = 0;
  int range = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  double mae = 0.0;
  std::string error;
};

// Mean-over-seeds MAE with one row per axis value and one column per asset.
struct ResultMatrix {
  std::string axis_name;  // "prediction_range" or "window_length"
  std::vector<int> axis;
  std::vector<std::string> assets;
  Matrix values;  // axis.size() x assets.size(); NaN when every seed failed
};

// Per-segment errors pooled across seeds for one (asset, axis value) pair;
// feeds the box-plot summaries.
struct PooledErrors {
  std::string asset;
  int axis_value = 0;
  std::vector<double> errors;
};

struct GridResult {
  std::vector<GridCell> cells;  // ordered by (asset, window, range, seed)
  ResultMatrix by_range;        // window_len fixed at config.fixed_window
  ResultMatrix by_window;       // range fixed at config.fixed_range
  // by_range minus its range-1 row, column by column; empty when the range
  // list has no 1.
  ResultMatrix subtraction;
  bool has_subtraction = false;
  std::vector<PooledErrors> errors_by_range;   // fixed window
  std::vector<PooledErrors> errors_by_window;  // fixed range
};

// A loaded data file with its chronological train/test split.
struct PreparedAsset {
  RawSeries full;
  RawSeries train;
  RawSeries test;
};
PreparedAsset load_and_split(const AssetSpec& asset, double train_fraction);

// Builds and trains the configured LSTM on the given training windows: fresh
// parameters from a child stream of `seed`, then the configured optimizer run
// with `seed` driving the batch shuffle. The single entry point for both the
// grid and the train command, so a one-cell grid and a direct training run
// produce identical bits.
TrainResult train_lstm_for(const ExperimentConfig& config,
                           const WindowSet& train_windows, std::uint64_t seed);

// Runs the full (asset x window x range x seed) sweep. Each (asset, window,
// seed) model is trained once and reused across ranges; cells run in parallel
// but are aggregated in a fixed order, so the result is identical to a serial
// run. Per-cell failures are recorded in the cell and do not abort the sweep.
GridResult grid_run(const ExperimentConfig& config);

}  // namespace cryptolab
