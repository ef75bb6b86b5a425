// Sliding-window construction with per-window percentage normalization.
//
// Each window of length W over a feature column p is encoded against the
// window's first value p_0:
//     n_i = p_i / p_0 - 1            (normalize)
//     p_i = p_0 * (n_i + 1)          (denormalize)
// so the first normalized value of every column is exactly 0 and the encoding
// depends only on price ratios. Targets are the normalized close values at
// offsets W .. W+H-1 against the same close base.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "cryptolab/core/types.hpp"
#include "cryptolab/data/ohlcv.hpp"

namespace cryptolab {

inline Scalar normalized_value(Scalar p, Scalar p0) { return p / p0 - 1.0; }

// Inverse of the window encoding; p0 must be positive.
Scalar denormalize(Scalar n, Scalar p0);

struct Window {
  Matrix features;       // window_len x n_features, normalized
  Vector target;         // length = horizon, normalized close values
  Vector base_values;    // per-feature p_0 in original units
  Index start_index = 0; // position of the window's first row in the series

  // The close base used for target (de)normalization.
  Scalar close_base(Index close_column) const { return base_values[close_column]; }
};

struct WindowSet {
  std::vector<Window> windows;
  int window_len = 0;
  int horizon = 0;
  std::vector<std::string> feature_names;
  std::string asset;

  std::size_t size() const { return windows.size(); }
  // Column index of the close feature; every WindowSet must contain it.
  Index close_column() const;
};

// Expected number of stride-1 windows: len - window_len - horizon + 1 when
// positive, else 0.
std::size_t window_count(std::size_t series_len, int window_len, int horizon);

// Builds stride-1 sliding windows over the series. Every feature column is
// normalized per window against its own first value; the close feature must
// be present (targets are close values). Throws ParameterError when the
// series is shorter than window_len + horizon.
WindowSet make_windows(const RawSeries& series, int window_len, int horizon,
                       const std::vector<std::string>& features = {"close", "volume"});

// Normalizes one price-space column slice into normalized values against its
// first element. Shared by make_windows and the recursive backtest rollout so
// both produce bit-identical encodings.
void normalize_column(std::span<const double> values, Scalar p0,
                      Matrix& out, Index column);

}  // namespace cryptolab
