#include "cryptolab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <thread>
#include <utility>

#include <json.hpp>

#include "cryptolab/analysis.hpp"
#include "cryptolab/backtest.hpp"
#include "cryptolab/core/errors.hpp"
#include "cryptolab/data/windows.hpp"

namespace cryptolab {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(ModelKind kind) {
  return kind == ModelKind::Lstm ? "lstm" : "random_walk";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "lstm") return ModelKind::Lstm;
  if (name == "random_walk") return ModelKind::RandomWalk;
  throw SchemaError("unknown model kind '" + name + "' (use lstm or random_walk)");
}

std::string to_string(DriftMode mode) {
  return mode == DriftMode::Zero ? "zero" : "fitted";
}

DriftMode drift_mode_from_string(const std::string& name) {
  if (name == "zero") return DriftMode::Zero;
  if (name == "fitted") return DriftMode::Fitted;
  throw SchemaError("unknown drift mode '" + name + "' (use zero or fitted)");
}

void ExperimentConfig::validate() const {
  if (assets.empty()) throw ParameterError("config: at least one asset required");
  for (const AssetSpec& a : assets) {
    if (a.name.empty()) throw ParameterError("config: asset name must be nonempty");
    if (a.data_path.empty()) throw ParameterError("config: asset data path must be nonempty");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ParameterError("config: train_fraction must lie in (0, 1)");
  }
  if (window_lengths.empty()) throw ParameterError("config: window_lengths must be nonempty");
  if (prediction_ranges.empty()) {
    throw ParameterError("config: prediction_ranges must be nonempty");
  }
  for (int w : window_lengths) {
    if (w < 1) throw ParameterError("config: window lengths must be >= 1");
  }
  for (int r : prediction_ranges) {
    if (r < 1) throw ParameterError("config: prediction ranges must be >= 1");
  }
  if (std::find(window_lengths.begin(), window_lengths.end(), fixed_window) ==
      window_lengths.end()) {
    throw ParameterError("config: fixed_window must appear in window_lengths");
  }
  if (std::find(prediction_ranges.begin(), prediction_ranges.end(), fixed_range) ==
      prediction_ranges.end()) {
    throw ParameterError("config: fixed_range must appear in prediction_ranges");
  }
  if (features.empty()) throw ParameterError("config: features must be nonempty");
  if (std::find(features.begin(), features.end(), "close") == features.end()) {
    throw ParameterError("config: features must include close");
  }
  if (hidden_size < 1) throw ParameterError("config: hidden_size must be >= 1");
  if (seeds.empty()) throw ParameterError("config: seeds must be nonempty");
  train.validate();
}

namespace {

// Pulls a required key with a type check; names the key on failure.
template <typename T>
T get_field(const json& j, const std::string& key) {
  if (!j.contains(key)) throw SchemaError("config: missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError("config: key '" + key + "' has the wrong type");
  }
}

template <typename T>
T get_field_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError("config: key '" + key + "' has the wrong type");
  }
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& item : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return item.key() == k;
        }) == allowed.end()) {
      throw SchemaError("config: unknown key '" + item.key() + "' in " + where);
    }
  }
}

std::string resolve_path(const fs::path& config_dir, const std::string& raw) {
  fs::path p(raw);
  if (p.is_absolute()) return p.lexically_normal().string();
  return (config_dir / p).lexically_normal().string();
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("config: invalid JSON in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw SchemaError("config: top level must be a JSON object");
  reject_unknown_keys(j,
                      {"assets", "train_fraction", "window_lengths", "prediction_ranges",
                       "fixed_window", "fixed_range", "model", "features", "drift_mode",
                       "hidden_size", "train", "seeds", "output_dir", "checkpoint"},
                      "the top level");

  const fs::path config_dir = fs::absolute(fs::path(path)).parent_path();
  ExperimentConfig config;

  const json assets = get_field<json>(j, "assets");
  if (!assets.is_array()) throw SchemaError("config: 'assets' must be an array");
  for (const json& a : assets) {
    if (!a.is_object()) throw SchemaError("config: each asset must be an object");
    reject_unknown_keys(a, {"name", "data"}, "an asset entry");
    AssetSpec spec;
    spec.name = get_field<std::string>(a, "name");
    spec.data_path = resolve_path(config_dir, get_field<std::string>(a, "data"));
    config.assets.push_back(std::move(spec));
  }

  config.train_fraction = get_field_or<double>(j, "train_fraction", 0.8);
  config.window_lengths = get_field<std::vector<int>>(j, "window_lengths");
  config.prediction_ranges = get_field<std::vector<int>>(j, "prediction_ranges");
  config.fixed_window = get_field_or<int>(j, "fixed_window", config.window_lengths.front());
  config.fixed_range =
      get_field_or<int>(j, "fixed_range", config.prediction_ranges.front());
  config.model = model_kind_from_string(get_field_or<std::string>(j, "model", "lstm"));
  config.features =
      get_field_or<std::vector<std::string>>(j, "features", {"close", "volume"});
  config.drift_mode =
      drift_mode_from_string(get_field_or<std::string>(j, "drift_mode", "zero"));
  config.hidden_size = get_field_or<int>(j, "hidden_size", 32);
  config.seeds = get_field<std::vector<std::uint64_t>>(j, "seeds");
  config.output_dir = resolve_path(config_dir, get_field_or<std::string>(j, "output_dir", "out"));
  if (j.contains("checkpoint")) {
    config.checkpoint_path = resolve_path(config_dir, get_field<std::string>(j, "checkpoint"));
  }

  if (j.contains("train")) {
    const json t = get_field<json>(j, "train");
    if (!t.is_object()) throw SchemaError("config: 'train' must be an object");
    reject_unknown_keys(t,
                        {"epochs", "learning_rate", "batch_size", "validation_fraction",
                         "loss", "beta1", "beta2", "adam_epsilon"},
                        "the train section");
    config.train.epochs = get_field_or<int>(t, "epochs", config.train.epochs);
    config.train.learning_rate =
        get_field_or<double>(t, "learning_rate", config.train.learning_rate);
    config.train.batch_size = get_field_or<int>(t, "batch_size", config.train.batch_size);
    config.train.validation_fraction =
        get_field_or<double>(t, "validation_fraction", config.train.validation_fraction);
    if (t.contains("loss")) {
      config.train.loss = loss_from_string(get_field<std::string>(t, "loss"));
    }
    config.train.beta1 = get_field_or<double>(t, "beta1", config.train.beta1);
    config.train.beta2 = get_field_or<double>(t, "beta2", config.train.beta2);
    config.train.adam_epsilon =
        get_field_or<double>(t, "adam_epsilon", config.train.adam_epsilon);
  }

  config.validate();
  return config;
}

PreparedAsset load_and_split(const AssetSpec& asset, double train_fraction) {
  PreparedAsset prepared;
  prepared.full = parse_csv_file(asset.data_path, asset.name);
  auto [train_part, test_part] = split(prepared.full, train_fraction);
  prepared.train = std::move(train_part);
  prepared.test = std::move(test_part);
  return prepared;
}

TrainResult train_lstm_for(const ExperimentConfig& config,
                           const WindowSet& train_windows, std::uint64_t seed) {
  // Child stream 1 initializes the weights; the optimizer's shuffle stream is
  // seeded with the raw seed inside train(). Distinct streams, one seed.
  SeededRng init_rng = SeededRng(seed).derive(1);
  const LstmParams initial =
      LstmParams::random_init(config.hidden_size,
                              static_cast<int>(config.features.size()),
                              /*readout_dim=*/1, init_rng);
  TrainConfig tc = config.train;
  tc.seed = seed;
  return train(initial, tc, train_windows);
}

namespace {

// Everything produced by one (asset, window, seed) model across all ranges.
struct TaskResult {
  std::vector<GridCell> cells;                       // one per range, in order
  std::vector<std::vector<double>> segment_errors;   // one list per range
};

TaskResult run_task(const ExperimentConfig& config, const PreparedAsset* prepared,
                    const std::string& asset_name, const std::string& load_error,
                    int window_len, std::uint64_t seed) {
  TaskResult result;
  const std::size_t n_ranges = config.prediction_ranges.size();
  result.cells.resize(n_ranges);
  result.segment_errors.resize(n_ranges);
  for (std::size_t r = 0; r < n_ranges; ++r) {
    GridCell& cell = result.cells[r];
    cell.asset = asset_name;
    cell.window_len = window_len;
    cell.range = config.prediction_ranges[r];
    cell.seed = seed;
  }

  if (!load_error.empty()) {
    for (GridCell& cell : result.cells) cell.error = "data: " + load_error;
    return result;
  }

  // Build the model once; its cost dominates, and every range reuses it.
  std::unique_ptr<Predictor> predictor;
  try {
    if (config.model == ModelKind::Lstm) {
      const WindowSet train_windows =
          make_windows(prepared->train, window_len, /*horizon=*/1, config.features);
      TrainResult trained = train_lstm_for(config, train_windows, seed);
      predictor = std::make_unique<LstmPredictor>(std::move(trained.params));
    } else {
      const std::vector<double> closes = prepared->train.closes();
      const RandomWalkModel model = fit_random_walk(closes, config.drift_mode);
      const auto close_it =
          std::find(config.features.begin(), config.features.end(), "close");
      predictor = std::make_unique<RandomWalkPredictor>(
          model, static_cast<Index>(close_it - config.features.begin()));
    }
  } catch (const std::exception& e) {
    for (GridCell& cell : result.cells) cell.error = "model: " + std::string(e.what());
    return result;
  }

  for (std::size_t r = 0; r < n_ranges; ++r) {
    GridCell& cell = result.cells[r];
    try {
      BacktestReport report = run_multi_point(*predictor, prepared->test, window_len,
                                              cell.range, config.features);
      cell.ok = true;
      cell.mae = report.overall_mae;
      result.segment_errors[r] = std::move(report.per_segment_errors);
    } catch (const std::exception& e) {
      cell.error = "backtest: " + std::string(e.what());
    }
  }
  return result;
}

}  // namespace

GridResult grid_run(const ExperimentConfig& config) {
  config.validate();

  // Load every data file once, keeping per-asset failures to attribute to
  // that asset's cells instead of aborting the sweep.
  std::vector<PreparedAsset> prepared(config.assets.size());
  std::vector<std::string> load_errors(config.assets.size());
  for (std::size_t a = 0; a < config.assets.size(); ++a) {
    try {
      prepared[a] = load_and_split(config.assets[a], config.train_fraction);
    } catch (const std::exception& e) {
      load_errors[a] = e.what();
    }
  }

  struct TaskKey {
    std::size_t asset;
    std::size_t window;
    std::size_t seed;
  };
  std::vector<TaskKey> keys;
  for (std::size_t a = 0; a < config.assets.size(); ++a) {
    for (std::size_t w = 0; w < config.window_lengths.size(); ++w) {
      for (std::size_t s = 0; s < config.seeds.size(); ++s) keys.push_back({a, w, s});
    }
  }

  // Tasks are independent (each owns its generators and model); slots are
  // preassigned, so the aggregate below is scheduling-independent.
  std::vector<TaskResult> results(keys.size());
  std::atomic<std::size_t> next{0};
  const unsigned hw = std::thread::hardware_concurrency();
  const std::size_t n_threads =
      std::min<std::size_t>(keys.size(), hw == 0 ? 1 : hw);
  std::vector<std::thread> workers;
  workers.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < keys.size(); i = next.fetch_add(1)) {
        const TaskKey& key = keys[i];
        results[i] =
            run_task(config, &prepared[key.asset], config.assets[key.asset].name,
                     load_errors[key.asset], config.window_lengths[key.window],
                     config.seeds[key.seed]);
      }
    });
  }
  for (std::thread& w : workers) w.join();

  GridResult grid;
  const std::size_t n_windows = config.window_lengths.size();
  const std::size_t n_seeds = config.seeds.size();
  const std::size_t n_ranges = config.prediction_ranges.size();
  auto task_index = [&](std::size_t a, std::size_t w, std::size_t s) {
    return (a * n_windows + w) * n_seeds + s;
  };

  for (std::size_t a = 0; a < config.assets.size(); ++a) {
    for (std::size_t w = 0; w < n_windows; ++w) {
      for (std::size_t r = 0; r < n_ranges; ++r) {
        for (std::size_t s = 0; s < n_seeds; ++s) {
          grid.cells.push_back(results[task_index(a, w, s)].cells[r]);
        }
      }
    }
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto mean_over_seeds = [&](std::size_t a, std::size_t w, std::size_t r) {
    double sum = 0.0;
    std::size_t n_ok = 0;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      const GridCell& cell = results[task_index(a, w, s)].cells[r];
      if (cell.ok) {
        sum += cell.mae;
        ++n_ok;
      }
    }
    return n_ok == 0 ? nan : sum / static_cast<double>(n_ok);
  };

  const std::size_t fixed_w = static_cast<std::size_t>(
      std::find(config.window_lengths.begin(), config.window_lengths.end(),
                config.fixed_window) -
      config.window_lengths.begin());
  const std::size_t fixed_r = static_cast<std::size_t>(
      std::find(config.prediction_ranges.begin(), config.prediction_ranges.end(),
                config.fixed_range) -
      config.prediction_ranges.begin());

  grid.by_range.axis_name = "prediction_range";
  grid.by_range.axis = config.prediction_ranges;
  grid.by_window.axis_name = "window_length";
  grid.by_window.axis = config.window_lengths;
  for (const AssetSpec& spec : config.assets) {
    grid.by_range.assets.push_back(spec.name);
    grid.by_window.assets.push_back(spec.name);
  }
  grid.by_range.values.resize(static_cast<Index>(n_ranges),
                              static_cast<Index>(config.assets.size()));
  grid.by_window.values.resize(static_cast<Index>(n_windows),
                               static_cast<Index>(config.assets.size()));
  for (std::size_t a = 0; a < config.assets.size(); ++a) {
    for (std::size_t r = 0; r < n_ranges; ++r) {
      grid.by_range.values(static_cast<Index>(r), static_cast<Index>(a)) =
          mean_over_seeds(a, fixed_w, r);
    }
    for (std::size_t w = 0; w < n_windows; ++w) {
      grid.by_window.values(static_cast<Index>(w), static_cast<Index>(a)) =
          mean_over_seeds(a, w, fixed_r);
    }
  }

  const auto one_it = std::find(config.prediction_ranges.begin(),
                                config.prediction_ranges.end(), 1);
  if (one_it != config.prediction_ranges.end()) {
    const auto one_row =
        static_cast<Index>(one_it - config.prediction_ranges.begin());
    grid.has_subtraction = true;
    grid.subtraction.axis_name = grid.by_range.axis_name;
    grid.subtraction.axis = grid.by_range.axis;
    grid.subtraction.assets = grid.by_range.assets;
    grid.subtraction.values.resize(grid.by_range.values.rows(),
                                   grid.by_range.values.cols());
    for (Index r = 0; r < grid.subtraction.values.rows(); ++r) {
      for (Index a = 0; a < grid.subtraction.values.cols(); ++a) {
        const double multi = grid.by_range.values(r, a);
        const double single = grid.by_range.values(one_row, a);
        grid.subtraction.values(r, a) = (std::isfinite(multi) && std::isfinite(single))
                                            ? error_subtraction(multi, single)
                                            : nan;
      }
    }
  }

  for (std::size_t a = 0; a < config.assets.size(); ++a) {
    for (std::size_t r = 0; r < n_ranges; ++r) {
      PooledErrors pool;
      pool.asset = config.assets[a].name;
      pool.axis_value = config.prediction_ranges[r];
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const auto& segs = results[task_index(a, fixed_w, s)].segment_errors[r];
        pool.errors.insert(pool.errors.end(), segs.begin(), segs.end());
      }
      grid.errors_by_range.push_back(std::move(pool));
    }
    for (std::size_t w = 0; w < n_windows; ++w) {
      PooledErrors pool;
      pool.asset = config.assets[a].name;
      pool.axis_value = config.window_lengths[w];
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const auto& segs = results[task_index(a, w, s)].segment_errors[fixed_r];
        pool.errors.insert(pool.errors.end(), segs.begin(), segs.end());
      }
      grid.errors_by_window.push_back(std::move(pool));
    }
  }

  return grid;
}

}  // namespace cryptolab
