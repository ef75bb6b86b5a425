#include "cryptolab/data/windows.hpp"

#include <algorithm>

#include "cryptolab/core/errors.hpp"

namespace cryptolab {

Scalar denormalize(Scalar n, Scalar p0) {
  if (!(p0 > 0.0)) {
    throw ParameterError("denormalize: base value must be positive, got " +
                         std::to_string(p0));
  }
  return p0 * (n + 1.0);
}

Index WindowSet::close_column() const {
  const auto it = std::find(feature_names.begin(), feature_names.end(), "close");
  if (it == feature_names.end()) {
    throw ParameterError("WindowSet: close feature missing");
  }
  return static_cast<Index>(it - feature_names.begin());
}

std::size_t window_count(std::size_t series_len, int window_len, int horizon) {
  const auto needed = static_cast<std::size_t>(window_len) + static_cast<std::size_t>(horizon);
  if (series_len < needed) return 0;
  return series_len - needed + 1;
}

void normalize_column(std::span<const double> values, Scalar p0, Matrix& out,
                      Index column) {
  if (!(p0 > 0.0)) {
    throw DataError("normalize: base value must be positive, got " + std::to_string(p0));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    out(static_cast<Index>(i), column) = normalized_value(values[i], p0);
  }
}

WindowSet make_windows(const RawSeries& series, int window_len, int horizon,
                       const std::vector<std::string>& features) {
  if (window_len < 1 || horizon < 1) {
    throw ParameterError("make_windows: window_len and horizon must be >= 1");
  }
  if (features.empty()) throw ParameterError("make_windows: no features given");
  const std::size_t needed =
      static_cast<std::size_t>(window_len) + static_cast<std::size_t>(horizon);
  if (series.size() < needed) {
    throw ParameterError("make_windows: series has " + std::to_string(series.size()) +
                         " records, needs at least " + std::to_string(needed));
  }

  WindowSet set;
  set.window_len = window_len;
  set.horizon = horizon;
  set.feature_names = features;
  set.asset = series.asset;

  std::vector<std::vector<double>> columns;
  columns.reserve(features.size());
  for (const auto& f : features) columns.push_back(series.feature_column(f));

  const Index close_col = set.close_column();
  const std::vector<double>& closes = columns[static_cast<std::size_t>(close_col)];

  const std::size_t count = window_count(series.size(), window_len, horizon);
  set.windows.reserve(count);
  for (std::size_t start = 0; start < count; ++start) {
    Window w;
    w.start_index = static_cast<Index>(start);
    w.features.resize(window_len, static_cast<Index>(features.size()));
    w.base_values.resize(static_cast<Index>(features.size()));
    for (std::size_t f = 0; f < columns.size(); ++f) {
      const double p0 = columns[f][start];
      w.base_values[static_cast<Index>(f)] = p0;
      normalize_column(std::span<const double>(columns[f]).subspan(start,
                                                                   static_cast<std::size_t>(window_len)),
                       p0, w.features, static_cast<Index>(f));
    }
    const double close_base = w.base_values[close_col];
    w.target.resize(horizon);
    for (int h = 0; h < horizon; ++h) {
      w.target[h] = normalized_value(
          closes[start + static_cast<std::size_t>(window_len) + static_cast<std::size_t>(h)],
          close_base);
    }
    set.windows.push_back(std::move(w));
  }
  return set;
}

}  // namespace cryptolab
