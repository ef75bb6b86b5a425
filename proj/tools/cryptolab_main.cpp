// Command-line front end: data validation, LSTM training, walk-forward
// backtests, random-walk baselines, the full result-table sweep, and the
// gradient-flow / autocorrelation / forecast-lag diagnostics. Every
// subcommand prints a JSON summary to stdout; failures print a JSON error
// record to stderr and exit nonzero.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cryptolab/analysis.hpp"
#include "cryptolab/backtest.hpp"
#include "cryptolab/core/errors.hpp"
#include "cryptolab/core/rng.hpp"
#include "cryptolab/experiment.hpp"
#include "cryptolab/io/export.hpp"
#include "cryptolab/random_walk.hpp"
#include "cryptolab/rnn.hpp"
#include "cryptolab/train.hpp"

namespace {

namespace fs = std::filesystem;
using cryptolab::ExperimentConfig;
using ordered_json = nlohmann::ordered_json;

// Options shared by the config-driven subcommands.
struct CommonArgs {
  std::string config_path;
  std::string asset;  // empty = first asset in the config
};

const cryptolab::AssetSpec& select_asset(const ExperimentConfig& config,
                                         const std::string& name) {
  if (name.empty()) return config.assets.front();
  for (const cryptolab::AssetSpec& spec : config.assets) {
    if (spec.name == name) return spec;
  }
  throw cryptolab::ParameterError("asset '" + name + "' not present in the config");
}

std::string error_category(const std::exception& e) {
  if (dynamic_cast<const cryptolab::SchemaError*>(&e)) return "schema";
  if (dynamic_cast<const cryptolab::DataError*>(&e)) return "data";
  if (dynamic_cast<const cryptolab::FileError*>(&e)) return "file";
  if (dynamic_cast<const cryptolab::ShapeError*>(&e)) return "shape";
  if (dynamic_cast<const cryptolab::TrainingError*>(&e)) return "training";
  if (dynamic_cast<const cryptolab::EstimationError*>(&e)) return "estimation";
  if (dynamic_cast<const cryptolab::DiagnosticError*>(&e)) return "diagnostic";
  if (dynamic_cast<const cryptolab::ParameterError*>(&e)) return "parameter";
  if (dynamic_cast<const cryptolab::Error*>(&e)) return "error";
  return "internal";
}

void print_json(const ordered_json& doc) { std::cout << doc.dump(2) << "\n"; }

// --- ingest ---------------------------------------------------------------

int run_ingest(const std::string& csv_path, const std::string& asset) {
  const cryptolab::RawSeries series = cryptolab::parse_csv_file(csv_path, asset);
  const std::vector<double> closes = series.closes();
  double close_min = closes.front(), close_max = closes.front();
  for (double c : closes) {
    close_min = std::min(close_min, c);
    close_max = std::max(close_max, c);
  }
  bool has_cap = true;
  for (const auto& r : series.records) has_cap = has_cap && r.market_cap.has_value();

  ordered_json doc;
  doc["asset"] = series.asset;
  doc["records"] = series.records.size();
  doc["first_date"] = series.records.front().date.to_string();
  doc["last_date"] = series.records.back().date.to_string();
  doc["close_first"] = closes.front();
  doc["close_last"] = closes.back();
  doc["close_min"] = close_min;
  doc["close_max"] = close_max;
  doc["has_market_cap"] = has_cap;
  print_json(doc);
  return 0;
}

// --- train ----------------------------------------------------------------

struct TrainedModel {
  cryptolab::TrainResult result;
  std::string checkpoint_path;
  std::string log_path;
};

TrainedModel train_and_save(const ExperimentConfig& config,
                            const cryptolab::AssetSpec& asset,
                            const cryptolab::RawSeries& train_series, int window_len,
                            std::uint64_t seed) {
  const cryptolab::WindowSet train_windows =
      cryptolab::make_windows(train_series, window_len, /*horizon=*/1, config.features);
  TrainedModel out;
  out.result = cryptolab::train_lstm_for(config, train_windows, seed);

  const std::string tag =
      asset.name + "_w" + std::to_string(window_len) + "_s" + std::to_string(seed);
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) {
    throw cryptolab::FileError("cannot create directory " + config.output_dir + ": " +
                               ec.message());
  }
  out.checkpoint_path = (fs::path(config.output_dir) / ("checkpoint_" + tag + ".json")).string();
  out.log_path = (fs::path(config.output_dir) / ("train_log_" + tag + ".csv")).string();
  cryptolab::save_checkpoint(out.result.params, seed, out.checkpoint_path);
  cryptolab::export_epoch_log(out.result.log, out.log_path);
  return out;
}

int run_train(const CommonArgs& args, int window_len, std::int64_t seed_arg) {
  const ExperimentConfig config = cryptolab::load_experiment_config(args.config_path);
  const cryptolab::AssetSpec& asset = select_asset(config, args.asset);
  const int window = window_len > 0 ? window_len : config.fixed_window;
  const std::uint64_t seed =
      seed_arg >= 0 ? static_cast<std::uint64_t>(seed_arg) : config.seeds.front();

  const cryptolab::PreparedAsset prepared =
      cryptolab::load_and_split(asset, config.train_fraction);
  const TrainedModel trained =
      train_and_save(config, asset, prepared.train, window, seed);
  const cryptolab::EpochLog& last = trained.result.log.back();

  ordered_json doc;
  doc["asset"] = asset.name;
  doc["window_length"] = window;
  doc["seed"] = seed;
  doc["epochs"] = trained.result.log.size();
  doc["final_train_loss"] = last.train_loss;
  doc["final_train_mae"] = last.train_mae;
  doc["final_val_loss"] = last.val_loss;
  doc["final_val_mae"] = last.val_mae;
  doc["checkpoint"] = trained.checkpoint_path;
  doc["epoch_log"] = trained.log_path;
  print_json(doc);
  return 0;
}

// --- backtest -------------------------------------------------------------

std::unique_ptr<cryptolab::Predictor> build_predictor(const ExperimentConfig& config,
                                                      const cryptolab::RawSeries& train_series,
                                                      int window_len, std::uint64_t seed) {
  if (config.model == cryptolab::ModelKind::RandomWalk) {
    const cryptolab::RandomWalkModel model =
        cryptolab::fit_random_walk(train_series.closes(), config.drift_mode);
    cryptolab::Index close_col = 0;
    for (std::size_t f = 0; f < config.features.size(); ++f) {
      if (config.features[f] == "close") close_col = static_cast<cryptolab::Index>(f);
    }
    return std::make_unique<cryptolab::RandomWalkPredictor>(model, close_col);
  }
  if (!config.checkpoint_path.empty()) {
    return std::make_unique<cryptolab::LstmPredictor>(
        cryptolab::load_checkpoint(config.checkpoint_path).params);
  }
  const cryptolab::WindowSet train_windows =
      cryptolab::make_windows(train_series, window_len, /*horizon=*/1, config.features);
  return std::make_unique<cryptolab::LstmPredictor>(
      cryptolab::train_lstm_for(config, train_windows, seed).params);
}

int run_backtest(const CommonArgs& args, const std::string& mode, int window_len,
                 int range, std::int64_t seed_arg) {
  const ExperimentConfig config = cryptolab::load_experiment_config(args.config_path);
  const cryptolab::AssetSpec& asset = select_asset(config, args.asset);
  const int window = window_len > 0 ? window_len : config.fixed_window;
  const int r = range > 0 ? range : config.fixed_range;
  const std::uint64_t seed =
      seed_arg >= 0 ? static_cast<std::uint64_t>(seed_arg) : config.seeds.front();

  const cryptolab::PreparedAsset prepared =
      cryptolab::load_and_split(asset, config.train_fraction);
  const std::unique_ptr<cryptolab::Predictor> predictor =
      build_predictor(config, prepared.train, window, seed);

  cryptolab::BacktestReport report;
  if (mode == "point") {
    const cryptolab::WindowSet test_windows =
        cryptolab::make_windows(prepared.test, window, /*horizon=*/1, config.features);
    report = cryptolab::run_point_to_point(*predictor, test_windows);
  } else {
    report = cryptolab::run_multi_point(*predictor, prepared.test, window, r,
                                        config.features);
  }
  report.seed = seed;

  const std::string prefix = "backtest_" + asset.name + "_" + mode + "_w" +
                             std::to_string(window) + "_r" +
                             std::to_string(report.mode.range) + "_s" +
                             std::to_string(seed);
  const std::vector<std::string> files =
      cryptolab::export_backtest(report, config.output_dir, prefix);

  ordered_json doc;
  doc["asset"] = report.asset;
  doc["mode"] = mode == "point" ? "point_to_point" : "multi_point";
  doc["model"] = cryptolab::to_string(config.model);
  doc["window_length"] = report.window_len;
  doc["prediction_range"] = report.mode.range;
  doc["seed"] = seed;
  doc["segments"] = report.per_segment_errors.size();
  doc["points"] = report.pointwise_errors.size();
  doc["overall_mae"] = report.overall_mae;
  doc["files"] = files;
  print_json(doc);
  return 0;
}

// --- randomwalk -----------------------------------------------------------

int run_randomwalk(const CommonArgs& args, const std::string& mode, bool stochastic) {
  const ExperimentConfig config = cryptolab::load_experiment_config(args.config_path);
  const cryptolab::AssetSpec& asset = select_asset(config, args.asset);
  const cryptolab::PreparedAsset prepared =
      cryptolab::load_and_split(asset, config.train_fraction);

  const cryptolab::RandomWalkModel model =
      cryptolab::fit_random_walk(prepared.train.closes(), config.drift_mode);
  const std::vector<double> test_closes = prepared.test.closes();
  cryptolab::SeededRng rng(config.seeds.front());

  // Price-space forecast for plotting, plus the windowed-protocol MAE that
  // the result tables use.
  std::vector<double> forecast;
  std::vector<double> truths;
  std::size_t first_index = 0;
  if (mode == "single") {
    forecast = stochastic ? cryptolab::predict_single_point(model, test_closes, rng)
                          : cryptolab::predict_single_point(model, test_closes);
    truths.assign(test_closes.begin() + 1, test_closes.end());
    first_index = 1;
  } else {
    const std::vector<double> train_closes = prepared.train.closes();
    forecast = stochastic
                   ? cryptolab::predict_multi_point(model, train_closes.back(),
                                                    test_closes.size(), rng)
                   : cryptolab::predict_multi_point(model, train_closes.back(),
                                                    test_closes.size());
    truths = test_closes;
  }
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < forecast.size(); ++i) {
    abs_sum += std::abs(forecast[i] - truths[i]);
  }
  const double price_mae = abs_sum / static_cast<double>(forecast.size());

  cryptolab::Index close_col = 0;
  for (std::size_t f = 0; f < config.features.size(); ++f) {
    if (config.features[f] == "close") close_col = static_cast<cryptolab::Index>(f);
  }
  const cryptolab::RandomWalkPredictor predictor(model, close_col);
  double protocol_mae;
  if (mode == "single") {
    const cryptolab::WindowSet test_windows = cryptolab::make_windows(
        prepared.test, config.fixed_window, /*horizon=*/1, config.features);
    protocol_mae = cryptolab::run_point_to_point(predictor, test_windows).overall_mae;
  } else {
    protocol_mae = cryptolab::run_multi_point(predictor, prepared.test,
                                              config.fixed_window, config.fixed_range,
                                              config.features)
                       .overall_mae;
  }

  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) {
    throw cryptolab::FileError("cannot create directory " + config.output_dir + ": " +
                               ec.message());
  }
  const std::string tag =
      asset.name + "_" + mode + (stochastic ? "_stochastic" : "");
  const std::string forecast_path =
      (fs::path(config.output_dir) / ("randomwalk_" + tag + "_forecast.csv")).string();
  {
    std::string csv = "index,predicted,truth\n";
    for (std::size_t i = 0; i < forecast.size(); ++i) {
      csv += std::to_string(first_index + i) + ',' +
             cryptolab::format_double(forecast[i]) + ',' +
             cryptolab::format_double(truths[i]) + '\n';
    }
    std::ofstream out(forecast_path, std::ios::binary);
    if (!out) throw cryptolab::FileError("cannot open " + forecast_path + " for writing");
    out << csv;
  }

  ordered_json doc;
  doc["asset"] = asset.name;
  doc["mode"] = mode;
  doc["stochastic"] = stochastic;
  doc["drift_mode"] = cryptolab::to_string(config.drift_mode);
  doc["mu_hat"] = model.mu_hat;
  doc["sigma_hat"] = model.sigma_hat;
  doc["price_mae"] = price_mae;
  doc["protocol_mae"] = protocol_mae;
  doc["files"] = std::vector<std::string>{forecast_path};
  print_json(doc);
  return 0;
}

// --- grid -----------------------------------------------------------------

int run_grid(const CommonArgs& args) {
  const ExperimentConfig config = cryptolab::load_experiment_config(args.config_path);
  const cryptolab::GridResult grid = cryptolab::grid_run(config);
  const std::vector<std::string> files =
      cryptolab::export_grid(grid, config.output_dir);

  std::size_t ok = 0;
  for (const cryptolab::GridCell& cell : grid.cells) ok += cell.ok ? 1 : 0;
  ordered_json doc;
  doc["model"] = cryptolab::to_string(config.model);
  doc["cells"] = grid.cells.size();
  doc["ok"] = ok;
  doc["failed"] = grid.cells.size() - ok;
  doc["files"] = files;
  print_json(doc);
  return 0;
}

// --- diagnose -------------------------------------------------------------

int run_diagnose_hysteresis(const CommonArgs& args, std::size_t max_lag,
                            std::size_t ar_order) {
  const ExperimentConfig config = cryptolab::load_experiment_config(args.config_path);
  const cryptolab::AssetSpec& asset = select_asset(config, args.asset);
  const cryptolab::PreparedAsset prepared =
      cryptolab::load_and_split(asset, config.train_fraction);

  const std::unique_ptr<cryptolab::Predictor> predictor = build_predictor(
      config, prepared.train, config.fixed_window, config.seeds.front());
  const cryptolab::WindowSet test_windows = cryptolab::make_windows(
      prepared.test, config.fixed_window, /*horizon=*/1, config.features);
  const cryptolab::BacktestReport report =
      cryptolab::run_point_to_point(*predictor, test_windows);

  std::vector<double> predictions, truths;
  predictions.reserve(report.predictions.size());
  truths.reserve(report.predictions.size());
  for (const cryptolab::PredictionPoint& p : report.predictions) {
    predictions.push_back(p.predicted);
    truths.push_back(p.truth);
  }
  const cryptolab::HysteresisReport hysteresis =
      cryptolab::hysteresis_diagnostic(predictions, truths, max_lag, ar_order);

  ordered_json doc;
  doc["asset"] = asset.name;
  doc["model"] = cryptolab::to_string(config.model);
  doc["window_length"] = config.fixed_window;
  doc["points"] = predictions.size();
  doc["best_lag"] = hysteresis.best_lag;
  ordered_json lags = ordered_json::array();
  for (const cryptolab::LagCorrelation& lc : hysteresis.lag_correlations) {
    lags.push_back(ordered_json{{"lag", lc.lag}, {"r", lc.r}});
  }
  doc["lag_correlations"] = std::move(lags);
  doc["ar_order"] = hysteresis.ar_order;
  doc["ar_weights"] = hysteresis.ar_weights;
  doc["residual_sigma"] = hysteresis.residual_sigma;
  print_json(doc);
  return 0;
}

int run_diagnose_gradflow(int seq_len, double recurrent_weight, double input_weight,
                          const std::string& activation_name) {
  const cryptolab::Activation activation =
      cryptolab::activation_from_string(activation_name);
  const cryptolab::RnnParams params = cryptolab::RnnParams::scalar(
      input_weight, recurrent_weight, 0.0, 1.0, 0.0, activation);
  const cryptolab::GradientFlowProfile profile =
      cryptolab::rnn_gradient_flow(params, seq_len);

  ordered_json doc;
  doc["sequence_length"] = seq_len;
  doc["recurrent_weight"] = recurrent_weight;
  doc["activation"] = activation_name;
  doc["cumulative_factor"] = profile.cumulative_factor();
  doc["cumulative_norms"] = profile.cumulative_norms;
  print_json(doc);
  return 0;
}

int run_diagnose_autocorr(double sigma, std::size_t n_paths, std::uint64_t seed,
                          std::vector<std::size_t> ts, std::vector<std::size_t> ks) {
  if (ts.size() != ks.size()) {
    throw cryptolab::ParameterError("--t and --k must be given the same number of times");
  }
  if (ts.empty()) {
    ts = {50, 200, 1000};
    ks = {1, 20, 100};
  }
  cryptolab::RandomWalkModel model;
  model.sigma_hat = sigma;
  model.drift_mode = cryptolab::DriftMode::Zero;
  cryptolab::SeededRng rng(seed);

  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double analytic = cryptolab::autocorr_analytic(ts[i], ks[i]);
    cryptolab::SeededRng point_rng = rng.derive(i);
    const double empirical =
        cryptolab::autocorr_empirical(model, ts[i], ks[i], n_paths, point_rng);
    rows.push_back(ordered_json{{"t", ts[i]},
                                {"k", ks[i]},
                                {"analytic", analytic},
                                {"empirical", empirical},
                                {"abs_diff", std::abs(analytic - empirical)}});
  }
  ordered_json doc;
  doc["sigma"] = sigma;
  doc["paths"] = n_paths;
  doc["seed"] = seed;
  doc["grid"] = std::move(rows);
  print_json(doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic forecasting laboratory: LSTM vs random walk on "
               "windowed price series"};
  app.require_subcommand(1);

  std::string ingest_csv, ingest_asset;
  CLI::App* ingest = app.add_subcommand("ingest", "Validate and summarize a data file");
  ingest->add_option("csv", ingest_csv, "CSV file with Date,Open,High,Low,Close,Volume")
      ->required();
  ingest->add_option("--asset", ingest_asset, "Asset name for the summary")->required();

  CommonArgs train_args;
  int train_window = 0;
  std::int64_t train_seed = -1;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train the LSTM, write checkpoint and epoch log");
  train_cmd->add_option("--config", train_args.config_path, "JSON config file")
      ->required();
  train_cmd->add_option("--asset", train_args.asset, "Asset name (default: first)");
  train_cmd->add_option("--window", train_window, "Window length (default: fixed_window)");
  train_cmd->add_option("--seed", train_seed, "Seed (default: first of seeds)");

  CommonArgs backtest_args;
  std::string backtest_mode;
  int backtest_window = 0, backtest_range = 0;
  std::int64_t backtest_seed = -1;
  CLI::App* backtest_cmd = app.add_subcommand("backtest", "Run one walk-forward backtest");
  backtest_cmd->add_option("--config", backtest_args.config_path, "JSON config file")
      ->required();
  backtest_cmd->add_option("--mode", backtest_mode, "point or multi")
      ->required()
      ->check(CLI::IsMember({"point", "multi"}));
  backtest_cmd->add_option("--asset", backtest_args.asset, "Asset name (default: first)");
  backtest_cmd->add_option("--window", backtest_window,
                           "Window length (default: fixed_window)");
  backtest_cmd->add_option("--range", backtest_range,
                           "Prediction range for multi mode (default: fixed_range)");
  backtest_cmd->add_option("--seed", backtest_seed, "Seed (default: first of seeds)");

  CommonArgs rw_args;
  std::string rw_mode;
  bool rw_stochastic = false;
  CLI::App* rw_cmd = app.add_subcommand("randomwalk", "Random-walk baseline forecasts");
  rw_cmd->add_option("--config", rw_args.config_path, "JSON config file")->required();
  rw_cmd->add_option("--mode", rw_mode, "single or multi")
      ->required()
      ->check(CLI::IsMember({"single", "multi"}));
  rw_cmd->add_option("--asset", rw_args.asset, "Asset name (default: first)");
  rw_cmd->add_flag("--stochastic", rw_stochastic, "Add sampled noise to the forecast");

  CommonArgs grid_args;
  CLI::App* grid_cmd =
      app.add_subcommand("grid", "Full window x range x seed sweep with exports");
  grid_cmd->add_option("--config", grid_args.config_path, "JSON config file")->required();

  CLI::App* diagnose = app.add_subcommand("diagnose", "Diagnostics");
  diagnose->require_subcommand(1);

  CommonArgs hyst_args;
  std::size_t hyst_max_lag = 5, hyst_ar_order = 2;
  CLI::App* hyst_cmd = diagnose->add_subcommand(
      "hysteresis", "Lag-correlation and AR probe of single-point forecasts");
  hyst_cmd->add_option("--config", hyst_args.config_path, "JSON config file")->required();
  hyst_cmd->add_option("--asset", hyst_args.asset, "Asset name (default: first)");
  hyst_cmd->add_option("--max-lag", hyst_max_lag, "Largest lag to scan (default 5)");
  hyst_cmd->add_option("--ar-order", hyst_ar_order, "Autoregression order (default 2)");

  int gf_seq_len = 100;
  double gf_weight = 0.5, gf_input_weight = 1.0;
  std::string gf_activation = "linear";
  CLI::App* gf_cmd = diagnose->add_subcommand(
      "gradflow", "Cumulative state-to-state Jacobian of a one-neuron recurrent net");
  gf_cmd->add_option("--seq-len", gf_seq_len, "Sequence length (default 100)");
  gf_cmd->add_option("--weight", gf_weight, "Recurrent weight (default 0.5)");
  gf_cmd->add_option("--input-weight", gf_input_weight, "Input weight (default 1)");
  gf_cmd->add_option("--activation", gf_activation, "linear or tanh")
      ->check(CLI::IsMember({"linear", "tanh", "sigmoid"}));

  double ac_sigma = 1.0;
  std::size_t ac_paths = 50000;
  std::uint64_t ac_seed = 1;
  std::vector<std::size_t> ac_ts, ac_ks;
  CLI::App* ac_cmd = diagnose->add_subcommand(
      "autocorr", "Analytic vs Monte-Carlo walk autocorrelation");
  ac_cmd->add_option("--sigma", ac_sigma, "Increment standard deviation (default 1)");
  ac_cmd->add_option("--paths", ac_paths, "Ensemble size (default 50000)");
  ac_cmd->add_option("--seed", ac_seed, "Base seed (default 1)");
  ac_cmd->add_option("--t", ac_ts, "Time index (repeatable; default grid)");
  ac_cmd->add_option("--k", ac_ks, "Lag (repeatable, pairs with --t)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    // Keep stderr a single machine-readable record instead of the default
    // plain-text usage message.
    ordered_json record;
    record["error"] = "usage";
    record["message"] = e.what();
    std::cerr << record.dump() << "\n";
    return e.get_exit_code();
  }

  try {
    if (*ingest) return run_ingest(ingest_csv, ingest_asset);
    if (*train_cmd) return run_train(train_args, train_window, train_seed);
    if (*backtest_cmd) {
      return run_backtest(backtest_args, backtest_mode, backtest_window,
                          backtest_range, backtest_seed);
    }
    if (*rw_cmd) return run_randomwalk(rw_args, rw_mode, rw_stochastic);
    if (*grid_cmd) return run_grid(grid_args);
    if (*hyst_cmd) return run_diagnose_hysteresis(hyst_args, hyst_max_lag, hyst_ar_order);
    if (*gf_cmd) {
      return run_diagnose_gradflow(gf_seq_len, gf_weight, gf_input_weight, gf_activation);
    }
    if (*ac_cmd) return run_diagnose_autocorr(ac_sigma, ac_paths, ac_seed, ac_ts, ac_ks);
    return 1;  // unreachable: require_subcommand(1)
  } catch (const std::exception& e) {
    ordered_json record;
    record["error"] = error_category(e);
    record["message"] = e.what();
    std::cerr << record.dump() << "\n";
    return 1;
  }
}
