#pragma once

// Plot-ready result files. Every export is deterministic: fixed column
// orders, no timestamps, and doubles printed with enough digits to re-parse
// to the same bits, so re-exporting identical inputs yields byte-identical
// files.

#include <span>
#include <string>
#include <vector>

#include "cryptolab/backtest.hpp"
#include "cryptolab/experiment.hpp"
#include "cryptolab/train.hpp"

namespace cryptolab {

// Shortest-faithful decimal form of a double (17 significant digits).
std::string format_double(double value);

// Writes <prefix>_predictions.csv (per-point prediction/truth series),
// <prefix>_segments.csv (per-segment MAE) and <prefix>_summary.json into dir,
// creating it if needed. Returns the written paths in a fixed order. Throws
// ParameterError when the report carries no errors and FileError on I/O
// failure.
std::vector<std::string> export_backtest(const BacktestReport& report,
                                         const std::string& dir,
                                         const std::string& prefix);

// Writes the per-epoch training curve as CSV.
void export_epoch_log(std::span<const EpochLog> log, const std::string& path);

// Writes the sweep outputs into dir: the two MAE matrices, the single-step
// subtraction matrix when a range-1 column exists, every cell as JSON, and
// five-number summaries of the pooled per-segment errors for both matrix
// axes. Returns the written paths. Throws ParameterError when a pooled error
// list is empty (nothing to summarize) and FileError on I/O failure.
std::vector<std::string> export_grid(const GridResult& grid, const std::string& dir);

}  // namespace cryptolab
