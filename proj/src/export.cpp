#include "cryptolab/io/export.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cryptolab/analysis.hpp"
#include "cryptolab/core/errors.hpp"

namespace cryptolab {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FileError("cannot create directory " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw FileError("write failed for " + path);
}

std::string mode_name(const PredictionMode& mode) {
  return mode.kind == PredictionMode::Kind::PointToPoint ? "point_to_point"
                                                         : "multi_point";
}

std::string matrix_csv(const ResultMatrix& m) {
  std::ostringstream csv;
  csv << m.axis_name;
  for (const std::string& asset : m.assets) csv << ',' << asset;
  csv << '\n';
  for (Index r = 0; r < m.values.rows(); ++r) {
    csv << m.axis[static_cast<std::size_t>(r)];
    for (Index c = 0; c < m.values.cols(); ++c) {
      csv << ',' << format_double(m.values(r, c));
    }
    csv << '\n';
  }
  return csv.str();
}

std::string box_stats_csv(std::span<const PooledErrors> pools,
                          const std::string& axis_name) {
  std::ostringstream csv;
  csv << "asset," << axis_name << ",min,q1,median,q3,max\n";
  for (const PooledErrors& pool : pools) {
    const BoxStats stats = box_stats(pool.errors);
    csv << pool.asset << ',' << pool.axis_value << ',' << format_double(stats.min)
        << ',' << format_double(stats.q1) << ',' << format_double(stats.median) << ','
        << format_double(stats.q3) << ',' << format_double(stats.max) << '\n';
  }
  return csv.str();
}

}  // namespace

std::vector<std::string> export_backtest(const BacktestReport& report,
                                         const std::string& dir,
                                         const std::string& prefix) {
  if (report.pointwise_errors.empty()) {
    throw ParameterError("export_backtest: report carries no errors");
  }
  ensure_dir(dir);
  const std::string base = (fs::path(dir) / prefix).string();
  std::vector<std::string> written;

  {
    std::ostringstream csv;
    csv << "index,predicted,truth\n";
    for (const PredictionPoint& p : report.predictions) {
      csv << p.index << ',' << format_double(p.predicted) << ','
          << format_double(p.truth) << '\n';
    }
    const std::string path = base + "_predictions.csv";
    write_text(path, csv.str());
    written.push_back(path);
  }
  {
    std::ostringstream csv;
    csv << "segment,mae\n";
    for (std::size_t i = 0; i < report.per_segment_errors.size(); ++i) {
      csv << i << ',' << format_double(report.per_segment_errors[i]) << '\n';
    }
    const std::string path = base + "_segments.csv";
    write_text(path, csv.str());
    written.push_back(path);
  }
  {
    ordered_json summary;
    summary["asset"] = report.asset;
    summary["mode"] = mode_name(report.mode);
    summary["window_length"] = report.window_len;
    summary["prediction_range"] = report.mode.range;
    summary["seed"] = report.seed;
    summary["points"] = report.pointwise_errors.size();
    summary["segments"] = report.per_segment_errors.size();
    summary["overall_mae"] = report.overall_mae;
    const std::string path = base + "_summary.json";
    write_text(path, summary.dump(2) + "\n");
    written.push_back(path);
  }
  return written;
}

void export_epoch_log(std::span<const EpochLog> log, const std::string& path) {
  std::ostringstream csv;
  csv << "epoch,train_loss,train_mae,val_loss,val_mae\n";
  for (const EpochLog& e : log) {
    csv << e.epoch << ',' << format_double(e.train_loss) << ','
        << format_double(e.train_mae) << ',' << format_double(e.val_loss) << ','
        << format_double(e.val_mae) << '\n';
  }
  write_text(path, csv.str());
}

std::vector<std::string> export_grid(const GridResult& grid, const std::string& dir) {
  ensure_dir(dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    const std::string path = (fs::path(dir) / name).string();
    write_text(path, content);
    written.push_back(path);
  };

  emit("mae_by_prediction_range.csv", matrix_csv(grid.by_range));
  emit("mae_by_window_length.csv", matrix_csv(grid.by_window));
  if (grid.has_subtraction) {
    emit("error_subtraction.csv", matrix_csv(grid.subtraction));
  }

  ordered_json cells = ordered_json::array();
  for (const GridCell& cell : grid.cells) {
    ordered_json c;
    c["asset"] = cell.asset;
    c["window_length"] = cell.window_len;
    c["prediction_range"] = cell.range;
    c["seed"] = cell.seed;
    c["ok"] = cell.ok;
    if (cell.ok) {
      c["mae"] = cell.mae;
    } else {
      c["error"] = cell.error;
    }
    cells.push_back(std::move(c));
  }
  ordered_json cells_doc;
  cells_doc["cells"] = std::move(cells);
  emit("grid_cells.json", cells_doc.dump(2) + "\n");

  emit("box_stats_by_prediction_range.csv",
       box_stats_csv(grid.errors_by_range, "prediction_range"));
  emit("box_stats_by_window_length.csv",
       box_stats_csv(grid.errors_by_window, "window_length"));
  return written;
}

}  // namespace cryptolab
