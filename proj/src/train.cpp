#include "cryptolab/train.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "cryptolab/core/errors.hpp"
#include "cryptolab/core/rng.hpp"

namespace cryptolab {

void TrainConfig::validate() const {
  if (epochs < 1) throw ParameterError("TrainConfig: epochs must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ParameterError("TrainConfig: learning_rate must be finite and >= 0");
  }
  if (batch_size < 1) throw ParameterError("TrainConfig: batch_size must be >= 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ParameterError("TrainConfig: validation_fraction must lie in [0, 1)");
  }
}

namespace {

// Adam first/second moment state, one slot per parameter tensor.
struct AdamState {
  LstmGradients m;
  LstmGradients v;
  long step = 0;

  explicit AdamState(const LstmParams& params)
      : m(LstmGradients::zeros_like(params)), v(LstmGradients::zeros_like(params)) {}
};

void adam_update_tensor(Eigen::Ref<Matrix> param, const Matrix& grad, Matrix& m,
                        Matrix& v, const TrainConfig& cfg, double bias1, double bias2) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v.array().matrix() + (1.0 - cfg.beta2) * grad.array().square().matrix();
  const Eigen::ArrayXXd m_hat = m.array() / bias1;
  const Eigen::ArrayXXd v_hat = v.array() / bias2;
  param.array() -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_epsilon);
}

void adam_update_vector(Vector& param, const Vector& grad, Vector& m, Vector& v,
                        const TrainConfig& cfg, double bias1, double bias2) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v.array().matrix() + (1.0 - cfg.beta2) * grad.array().square().matrix();
  const Eigen::ArrayXd m_hat = m.array() / bias1;
  const Eigen::ArrayXd v_hat = v.array() / bias2;
  param.array() -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_epsilon);
}

void adam_step(LstmParams& params, const LstmGradients& grads, AdamState& state,
               const TrainConfig& cfg) {
  ++state.step;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  adam_update_tensor(params.w_f, grads.w_f, state.m.w_f, state.v.w_f, cfg, bias1, bias2);
  adam_update_tensor(params.w_i, grads.w_i, state.m.w_i, state.v.w_i, cfg, bias1, bias2);
  adam_update_tensor(params.w_o, grads.w_o, state.m.w_o, state.v.w_o, cfg, bias1, bias2);
  adam_update_tensor(params.w_c, grads.w_c, state.m.w_c, state.v.w_c, cfg, bias1, bias2);
  adam_update_vector(params.b_f, grads.b_f, state.m.b_f, state.v.b_f, cfg, bias1, bias2);
  adam_update_vector(params.b_i, grads.b_i, state.m.b_i, state.v.b_i, cfg, bias1, bias2);
  adam_update_vector(params.b_o, grads.b_o, state.m.b_o, state.v.b_o, cfg, bias1, bias2);
  adam_update_vector(params.b_c, grads.b_c, state.m.b_c, state.v.b_c, cfg, bias1, bias2);
  adam_update_tensor(params.w_y, grads.w_y, state.m.w_y, state.v.w_y, cfg, bias1, bias2);
  adam_update_vector(params.b_y, grads.b_y, state.m.b_y, state.v.b_y, cfg, bias1, bias2);
}

void fisher_yates(std::vector<std::size_t>& idx, SeededRng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(idx[i - 1], idx[j]);
  }
}

std::vector<TrainingSample> to_samples(const WindowSet& windows, std::size_t begin,
                                       std::size_t end) {
  std::vector<TrainingSample> out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    out.push_back({windows.windows[i].features, windows.windows[i].target});
  }
  return out;
}

}  // namespace

TrainResult train(const LstmParams& initial, const TrainConfig& config,
                  const WindowSet& train_windows) {
  initial.validate();
  config.validate();
  if (train_windows.size() == 0) throw ParameterError("train: empty window set");
  if (train_windows.horizon != static_cast<int>(initial.readout_dim())) {
    throw ShapeError("train: window horizon " + std::to_string(train_windows.horizon) +
                     " must equal readout dimension " +
                     std::to_string(initial.readout_dim()));
  }

  // Chronological holdout: the last validation_fraction of windows.
  const std::size_t total = train_windows.size();
  std::size_t val_count =
      static_cast<std::size_t>(std::floor(static_cast<double>(total) * config.validation_fraction));
  if (val_count >= total) val_count = total - 1;
  const std::size_t fit_count = total - val_count;

  const std::vector<TrainingSample> fit_set = to_samples(train_windows, 0, fit_count);
  const std::vector<TrainingSample> val_set =
      val_count > 0 ? to_samples(train_windows, fit_count, total)
                    : to_samples(train_windows, 0, fit_count);

  TrainResult result;
  result.params = initial;
  AdamState adam(initial);
  SeededRng rng(config.seed);

  std::vector<std::size_t> order(fit_count);
  std::iota(order.begin(), order.end(), 0);

  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
  std::vector<TrainingSample> batch;
  batch.reserve(batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    fisher_yates(order, rng);

    double loss_sum = 0.0;
    double mae_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t begin = 0; begin < fit_count; begin += batch_size) {
      const std::size_t end = std::min(begin + batch_size, fit_count);
      batch.clear();
      for (std::size_t k = begin; k < end; ++k) batch.push_back(fit_set[order[k]]);

      const BatchGradients step = bptt_gradients_with_metrics(result.params, batch, config.loss);
      const LstmGradients& grads = step.gradients;
      const BatchMetrics& metrics = step.metrics;
      const auto count = static_cast<double>(batch.size());
      loss_sum += metrics.loss * count;
      mae_sum += metrics.mae * count;
      seen += batch.size();
      if (!std::isfinite(metrics.loss)) {
        throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch));
      }
      adam_step(result.params, grads, adam, config);
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(seen);
    log.train_mae = mae_sum / static_cast<double>(seen);
    const BatchMetrics val = evaluate_batch(result.params, val_set, config.loss);
    log.val_loss = val.loss;
    log.val_mae = val.mae;
    if (!std::isfinite(log.train_loss) || !std::isfinite(log.val_loss)) {
      throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch));
    }
    result.log.push_back(log);
  }
  return result;
}

namespace {

nlohmann::ordered_json matrix_to_json(const Matrix& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json vector_to_json(const Vector& v) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Index>(j.size());
  if (rows == 0) throw DataError("checkpoint: empty matrix");
  const auto cols = static_cast<Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    if (static_cast<Index>(j.at(r).size()) != cols) {
      throw DataError("checkpoint: ragged matrix rows");
    }
    for (Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

Vector vector_from_json(const nlohmann::json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

}  // namespace

void save_checkpoint(const LstmParams& params, std::uint64_t seed,
                     const std::string& path) {
  params.validate();
  nlohmann::ordered_json j;
  j["format"] = "cryptolab-lstm-checkpoint";
  j["version"] = 1;
  j["hidden_size"] = params.hidden_size;
  j["input_size"] = params.input_size;
  j["readout_dim"] = params.readout_dim();
  j["seed"] = seed;
  j["weights"]["w_f"] = matrix_to_json(params.w_f);
  j["weights"]["w_i"] = matrix_to_json(params.w_i);
  j["weights"]["w_o"] = matrix_to_json(params.w_o);
  j["weights"]["w_c"] = matrix_to_json(params.w_c);
  j["weights"]["b_f"] = vector_to_json(params.b_f);
  j["weights"]["b_i"] = vector_to_json(params.b_i);
  j["weights"]["b_o"] = vector_to_json(params.b_o);
  j["weights"]["b_c"] = vector_to_json(params.b_c);
  j["weights"]["w_y"] = matrix_to_json(params.w_y);
  j["weights"]["b_y"] = vector_to_json(params.b_y);

  std::ofstream out(path);
  if (!out.is_open()) throw FileError("cannot write checkpoint: " + path);
  out << j.dump(2) << "\n";
  if (!out.good()) throw FileError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw FileError("cannot open checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint parse error in " + path + ": " + e.what());
  }
  if (j.value("format", "") != "cryptolab-lstm-checkpoint") {
    throw DataError("not a checkpoint file: " + path);
  }

  Checkpoint ckpt;
  ckpt.seed = j.at("seed").get<std::uint64_t>();
  LstmParams& p = ckpt.params;
  p.hidden_size = j.at("hidden_size").get<int>();
  p.input_size = j.at("input_size").get<int>();
  const auto& w = j.at("weights");
  p.w_f = matrix_from_json(w.at("w_f"));
  p.w_i = matrix_from_json(w.at("w_i"));
  p.w_o = matrix_from_json(w.at("w_o"));
  p.w_c = matrix_from_json(w.at("w_c"));
  p.b_f = vector_from_json(w.at("b_f"));
  p.b_i = vector_from_json(w.at("b_i"));
  p.b_o = vector_from_json(w.at("b_o"));
  p.b_c = vector_from_json(w.at("b_c"));
  p.w_y = matrix_from_json(w.at("w_y"));
  p.b_y = vector_from_json(w.at("b_y"));
  p.validate();
  return ckpt;
}

}  // namespace cryptolab
