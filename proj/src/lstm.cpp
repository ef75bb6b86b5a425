#include "cryptolab/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "cryptolab/core/activations.hpp"
#include "cryptolab/core/errors.hpp"

namespace cryptolab {

void LstmParams::validate() const {
  if (hidden_size <= 0 || input_size <= 0) {
    throw ShapeError("LstmParams: hidden_size and input_size must be positive");
  }
  const Index h = hidden_size;
  const Index z = concat_dim();
  const Matrix* gates[] = {&w_f, &w_i, &w_o, &w_c};
  const char* names[] = {"W_f", "W_i", "W_o", "W_c"};
  for (int k = 0; k < 4; ++k) {
    if (gates[k]->rows() != h || gates[k]->cols() != z) {
      throw ShapeError(std::string("LstmParams: ") + names[k] + " has shape " +
                       shape_string(*gates[k]) + ", expected " + std::to_string(h) +
                       "x" + std::to_string(z));
    }
  }
  const Vector* biases[] = {&b_f, &b_i, &b_o, &b_c};
  for (const Vector* b : biases) {
    if (b->size() != h) throw ShapeError("LstmParams: gate bias length must equal hidden_size");
  }
  if (w_y.cols() != h) {
    throw ShapeError("LstmParams: W_y has shape " + shape_string(w_y) +
                     ", expected cols == hidden_size");
  }
  if (b_y.size() != w_y.rows()) {
    throw ShapeError("LstmParams: b_y length must equal readout dimension");
  }
}

LstmParams LstmParams::random_init(int hidden_size, int input_size, int readout_dim,
                                   SeededRng& rng) {
  if (hidden_size <= 0 || input_size <= 0 || readout_dim <= 0) {
    throw ParameterError("random_init: dimensions must be positive");
  }
  LstmParams p;
  p.hidden_size = hidden_size;
  p.input_size = input_size;
  const Index h = hidden_size;
  const Index z = hidden_size + input_size;

  const double gate_bound = 1.0 / std::sqrt(static_cast<double>(z));
  auto fill = [&rng](Matrix& m, Index rows, Index cols, double bound) {
    m.resize(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      for (Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
    }
  };
  fill(p.w_f, h, z, gate_bound);
  fill(p.w_i, h, z, gate_bound);
  fill(p.w_o, h, z, gate_bound);
  fill(p.w_c, h, z, gate_bound);
  const double readout_bound = 1.0 / std::sqrt(static_cast<double>(h));
  fill(p.w_y, readout_dim, h, readout_bound);

  p.b_f = Vector::Constant(h, 1.0);
  p.b_i = Vector::Zero(h);
  p.b_o = Vector::Zero(h);
  p.b_c = Vector::Zero(h);
  p.b_y = Vector::Zero(readout_dim);
  return p;
}

LstmCellResult lstm_cell_step(const LstmParams& params, const Vector& x_t,
                              const Vector& h_prev, const Vector& c_prev) {
  params.validate();
  if (x_t.size() != params.input_size) {
    throw ShapeError("lstm_cell_step: input has length " + std::to_string(x_t.size()) +
                     ", expected " + std::to_string(params.input_size));
  }
  if (h_prev.size() != params.hidden_size || c_prev.size() != params.hidden_size) {
    throw ShapeError("lstm_cell_step: state length must equal hidden_size");
  }
  Vector z(params.concat_dim());
  z << h_prev, x_t;

  LstmCellResult out;
  // Evaluate each pre-activation before the elementwise nonlinearity;
  // apply_activation reads coefficients one at a time, which is pathological
  // on an unevaluated product expression.
  const Vector a_f = params.w_f * z + params.b_f;
  const Vector a_i = params.w_i * z + params.b_i;
  const Vector a_o = params.w_o * z + params.b_o;
  const Vector a_c = params.w_c * z + params.b_c;
  out.gates.f = apply_activation(a_f, Activation::Sigmoid);
  out.gates.i = apply_activation(a_i, Activation::Sigmoid);
  out.gates.o = apply_activation(a_o, Activation::Sigmoid);
  out.gates.candidate = apply_activation(a_c, Activation::Tanh);
  out.c = (out.gates.f.array() * c_prev.array() +
           out.gates.i.array() * out.gates.candidate.array())
              .matrix();
  out.h = (out.gates.o.array() * out.c.array().tanh()).matrix();
  return out;
}

LstmTrace lstm_forward(const LstmParams& params, const Matrix& window) {
  params.validate();
  if (window.rows() == 0) throw ParameterError("lstm_forward: empty window");
  if (window.cols() != params.input_size) {
    throw ShapeError("lstm_forward: window has " + std::to_string(window.cols()) +
                     " features, expected " + std::to_string(params.input_size));
  }
  LstmTrace trace;
  trace.inputs = window;
  const Index steps = window.rows();
  trace.gates.reserve(steps);
  trace.cells.reserve(steps);
  trace.hiddens.reserve(steps);

  Vector h = Vector::Zero(params.hidden_size);
  Vector c = Vector::Zero(params.hidden_size);
  for (Index t = 0; t < steps; ++t) {
    LstmCellResult step = lstm_cell_step(params, window.row(t).transpose(), h, c);
    h = step.h;
    c = step.c;
    trace.gates.push_back(std::move(step.gates));
    trace.cells.push_back(c);
    trace.hiddens.push_back(h);
  }
  trace.prediction = params.w_y * h + params.b_y;
  return trace;
}

Vector cell_state_retention(const LstmTrace& trace) {
  if (trace.steps() < 2) {
    throw ParameterError("cell_state_retention: trace must span at least 2 steps");
  }
  Vector product = Vector::Ones(trace.gates.front().f.size());
  for (std::size_t t = 1; t < trace.gates.size(); ++t) {
    product = (product.array() * trace.gates[t].f.array()).matrix();
  }
  return product;
}

LstmGradients LstmGradients::zeros_like(const LstmParams& params) {
  LstmGradients g;
  g.w_f = Matrix::Zero(params.w_f.rows(), params.w_f.cols());
  g.w_i = Matrix::Zero(params.w_i.rows(), params.w_i.cols());
  g.w_o = Matrix::Zero(params.w_o.rows(), params.w_o.cols());
  g.w_c = Matrix::Zero(params.w_c.rows(), params.w_c.cols());
  g.b_f = Vector::Zero(params.b_f.size());
  g.b_i = Vector::Zero(params.b_i.size());
  g.b_o = Vector::Zero(params.b_o.size());
  g.b_c = Vector::Zero(params.b_c.size());
  g.w_y = Matrix::Zero(params.w_y.rows(), params.w_y.cols());
  g.b_y = Vector::Zero(params.b_y.size());
  return g;
}

LstmGradients& LstmGradients::add_scaled(const LstmGradients& other, Scalar scale) {
  w_f += scale * other.w_f;
  w_i += scale * other.w_i;
  w_o += scale * other.w_o;
  w_c += scale * other.w_c;
  b_f += scale * other.b_f;
  b_i += scale * other.b_i;
  b_o += scale * other.b_o;
  b_c += scale * other.b_c;
  w_y += scale * other.w_y;
  b_y += scale * other.b_y;
  return *this;
}

namespace {

Scalar sign_or_zero(Scalar x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// d(loss)/d(prediction) for one sample.
Vector loss_gradient(const Vector& target, const Vector& prediction, Loss loss) {
  Vector grad(prediction.size());
  if (loss == Loss::Sse) {
    grad = prediction - target;
  } else {
    const Scalar inv_m = 1.0 / static_cast<Scalar>(prediction.size());
    for (Index j = 0; j < prediction.size(); ++j) {
      grad[j] = sign_or_zero(prediction[j] - target[j]) * inv_m;
    }
  }
  return grad;
}

Scalar loss_value(const Vector& target, const Vector& prediction, Loss loss) {
  return loss == Loss::Sse ? sse_loss(target, prediction) : mae_loss(target, prediction);
}

struct SampleMetrics {
  Scalar loss = 0.0;
  Scalar mae = 0.0;
};

// Reverse accumulation through one window; accumulates raw (unscaled)
// gradients into acc and returns the sample loss and absolute error.
SampleMetrics backward_window(const LstmParams& params, const TrainingSample& sample,
                              Loss loss, LstmGradients& acc) {
  const LstmTrace trace = lstm_forward(params, sample.window);
  if (sample.target.size() != params.readout_dim()) {
    throw ShapeError("bptt_gradients: target has length " +
                     std::to_string(sample.target.size()) + ", expected " +
                     std::to_string(params.readout_dim()));
  }
  const Index T = trace.steps();
  const Index hidden = params.hidden_size;

  const Vector dy = loss_gradient(sample.target, trace.prediction, loss);

  acc.w_y.noalias() += dy * trace.hiddens[T - 1].transpose();
  acc.b_y += dy;

  Vector dh = params.w_y.transpose() * dy;
  Vector dc = Vector::Zero(hidden);

  for (Index t = T - 1; t >= 0; --t) {
    const LstmGates& g = trace.gates[t];
    const Vector& c_t = trace.cells[t];
    const Vector c_prev = (t > 0) ? trace.cells[t - 1] : Vector::Zero(hidden);
    const Vector& h_prev = (t > 0) ? trace.hiddens[t - 1] : Vector::Zero(hidden);

    const Eigen::ArrayXd tanh_c = c_t.array().tanh();
    const Eigen::ArrayXd d_o = dh.array() * tanh_c;
    dc.array() += dh.array() * g.o.array() * (1.0 - tanh_c.square());

    const Eigen::ArrayXd d_f = dc.array() * c_prev.array();
    const Eigen::ArrayXd d_i = dc.array() * g.candidate.array();
    const Eigen::ArrayXd d_g = dc.array() * g.i.array();

    // Pre-activation gradients through the gate nonlinearities.
    const Vector da_f = (d_f * g.f.array() * (1.0 - g.f.array())).matrix();
    const Vector da_i = (d_i * g.i.array() * (1.0 - g.i.array())).matrix();
    const Vector da_o = (d_o * g.o.array() * (1.0 - g.o.array())).matrix();
    const Vector da_c = (d_g * (1.0 - g.candidate.array().square())).matrix();

    Vector z(params.concat_dim());
    z << h_prev, sample.window.row(t).transpose();

    acc.w_f.noalias() += da_f * z.transpose();
    acc.w_i.noalias() += da_i * z.transpose();
    acc.w_o.noalias() += da_o * z.transpose();
    acc.w_c.noalias() += da_c * z.transpose();
    acc.b_f += da_f;
    acc.b_i += da_i;
    acc.b_o += da_o;
    acc.b_c += da_c;

    const Vector dz = params.w_f.transpose() * da_f + params.w_i.transpose() * da_i +
                      params.w_o.transpose() * da_o + params.w_c.transpose() * da_c;
    dh = dz.head(hidden);
    dc = (dc.array() * g.f.array()).matrix();
  }
  return {loss_value(sample.target, trace.prediction, loss),
          mae_loss(sample.target, trace.prediction)};
}

bool uniform_window_shape(std::span<const TrainingSample> batch) {
  const Index rows = batch.front().window.rows();
  const Index cols = batch.front().window.cols();
  for (const TrainingSample& s : batch) {
    if (s.window.rows() != rows || s.window.cols() != cols) return false;
  }
  return true;
}

// Reverse accumulation over a batch whose windows all share one shape: each
// timestep's gate algebra runs once on hidden x batch matrices (column b is
// sample b) instead of once per sample. Identical equations to
// backward_window; summation over the batch happens inside the matrix
// products, in an order fixed by the shapes alone, so results are bitwise
// reproducible run to run.
BatchGradients batched_backward(const LstmParams& params,
                                std::span<const TrainingSample> batch, Loss loss) {
  const Index batch_size = static_cast<Index>(batch.size());
  const Index steps = batch.front().window.rows();
  if (steps == 0) throw ParameterError("lstm_forward: empty window");
  if (batch.front().window.cols() != params.input_size) {
    throw ShapeError("lstm_forward: window has " +
                     std::to_string(batch.front().window.cols()) + " features, expected " +
                     std::to_string(params.input_size));
  }
  const Index hidden = params.hidden_size;
  const Index input = params.input_size;
  const Index readout = params.readout_dim();
  for (const TrainingSample& s : batch) {
    if (s.target.size() != readout) {
      throw ShapeError("bptt_gradients: target has length " +
                       std::to_string(s.target.size()) + ", expected " +
                       std::to_string(readout));
    }
  }

  // Forward pass, keeping per-step concatenated inputs, gates, and cells.
  std::vector<Matrix> concat(steps), gate_f(steps), gate_i(steps), gate_o(steps),
      gate_g(steps), cell(steps);
  Matrix h_state = Matrix::Zero(hidden, batch_size);
  Matrix c_state = Matrix::Zero(hidden, batch_size);
  for (Index t = 0; t < steps; ++t) {
    Matrix& z = concat[t];
    z.resize(hidden + input, batch_size);
    z.topRows(hidden) = h_state;
    for (Index b = 0; b < batch_size; ++b) {
      z.col(b).tail(input) = batch[b].window.row(t).transpose();
    }
    // Evaluate each pre-activation into a concrete matrix before the
    // elementwise nonlinearity; apply_activation reads coefficients one at a
    // time, which is pathological on an unevaluated product expression.
    const Matrix a_f = (params.w_f * z).colwise() + params.b_f;
    const Matrix a_i = (params.w_i * z).colwise() + params.b_i;
    const Matrix a_o = (params.w_o * z).colwise() + params.b_o;
    const Matrix a_c = (params.w_c * z).colwise() + params.b_c;
    gate_f[t] = apply_activation(a_f, Activation::Sigmoid);
    gate_i[t] = apply_activation(a_i, Activation::Sigmoid);
    gate_o[t] = apply_activation(a_o, Activation::Sigmoid);
    gate_g[t] = apply_activation(a_c, Activation::Tanh);
    c_state = (gate_f[t].array() * c_state.array() +
               gate_i[t].array() * gate_g[t].array())
                  .matrix();
    cell[t] = c_state;
    h_state = (gate_o[t].array() * c_state.array().tanh()).matrix();
  }
  const Matrix predictions = (params.w_y * h_state).colwise() + params.b_y;

  BatchMetrics metrics;
  Matrix dy(readout, batch_size);
  for (Index b = 0; b < batch_size; ++b) {
    const Vector prediction = predictions.col(b);
    dy.col(b) = loss_gradient(batch[b].target, prediction, loss);
    metrics.loss += loss_value(batch[b].target, prediction, loss);
    metrics.mae += mae_loss(batch[b].target, prediction);
  }

  LstmGradients acc = LstmGradients::zeros_like(params);
  acc.w_y.noalias() = dy * h_state.transpose();
  acc.b_y = dy.rowwise().sum();

  using BatchArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Matrix zero_state = Matrix::Zero(hidden, batch_size);
  Matrix dh = params.w_y.transpose() * dy;
  Matrix dc = Matrix::Zero(hidden, batch_size);
  for (Index t = steps - 1; t >= 0; --t) {
    const BatchArray tanh_c = cell[t].array().tanh();
    const BatchArray d_o = dh.array() * tanh_c;
    dc.array() += dh.array() * gate_o[t].array() * (1.0 - tanh_c.square());

    const Matrix& c_prev = (t > 0) ? cell[t - 1] : zero_state;
    const BatchArray d_f = dc.array() * c_prev.array();
    const BatchArray d_i = dc.array() * gate_g[t].array();
    const BatchArray d_g = dc.array() * gate_i[t].array();

    const Matrix da_f =
        (d_f * gate_f[t].array() * (1.0 - gate_f[t].array())).matrix();
    const Matrix da_i =
        (d_i * gate_i[t].array() * (1.0 - gate_i[t].array())).matrix();
    const Matrix da_o =
        (d_o * gate_o[t].array() * (1.0 - gate_o[t].array())).matrix();
    const Matrix da_c = (d_g * (1.0 - gate_g[t].array().square())).matrix();

    acc.w_f.noalias() += da_f * concat[t].transpose();
    acc.w_i.noalias() += da_i * concat[t].transpose();
    acc.w_o.noalias() += da_o * concat[t].transpose();
    acc.w_c.noalias() += da_c * concat[t].transpose();
    acc.b_f += da_f.rowwise().sum();
    acc.b_i += da_i.rowwise().sum();
    acc.b_o += da_o.rowwise().sum();
    acc.b_c += da_c.rowwise().sum();

    const Matrix dz = params.w_f.transpose() * da_f + params.w_i.transpose() * da_i +
                      params.w_o.transpose() * da_o + params.w_c.transpose() * da_c;
    dh = dz.topRows(hidden);
    dc = (dc.array() * gate_f[t].array()).matrix();
  }

  const Scalar inv_b = 1.0 / static_cast<Scalar>(batch_size);
  metrics.loss *= inv_b;
  metrics.mae *= inv_b;
  LstmGradients mean_grad = LstmGradients::zeros_like(params);
  mean_grad.add_scaled(acc, inv_b);
  return {std::move(mean_grad), metrics};
}

struct ParamView {
  const char* name;
  Scalar* data;
  Index rows, cols;
};

std::vector<ParamView> param_views(LstmParams& p) {
  return {
      {"w_f", p.w_f.data(), p.w_f.rows(), p.w_f.cols()},
      {"w_i", p.w_i.data(), p.w_i.rows(), p.w_i.cols()},
      {"w_o", p.w_o.data(), p.w_o.rows(), p.w_o.cols()},
      {"w_c", p.w_c.data(), p.w_c.rows(), p.w_c.cols()},
      {"b_f", p.b_f.data(), p.b_f.size(), 1},
      {"b_i", p.b_i.data(), p.b_i.size(), 1},
      {"b_o", p.b_o.data(), p.b_o.size(), 1},
      {"b_c", p.b_c.data(), p.b_c.size(), 1},
      {"w_y", p.w_y.data(), p.w_y.rows(), p.w_y.cols()},
      {"b_y", p.b_y.data(), p.b_y.size(), 1},
  };
}

std::vector<ParamView> gradient_views(LstmGradients& g) {
  return {
      {"w_f", g.w_f.data(), g.w_f.rows(), g.w_f.cols()},
      {"w_i", g.w_i.data(), g.w_i.rows(), g.w_i.cols()},
      {"w_o", g.w_o.data(), g.w_o.rows(), g.w_o.cols()},
      {"w_c", g.w_c.data(), g.w_c.rows(), g.w_c.cols()},
      {"b_f", g.b_f.data(), g.b_f.size(), 1},
      {"b_i", g.b_i.data(), g.b_i.size(), 1},
      {"b_o", g.b_o.data(), g.b_o.size(), 1},
      {"b_c", g.b_c.data(), g.b_c.size(), 1},
      {"w_y", g.w_y.data(), g.w_y.rows(), g.w_y.cols()},
      {"b_y", g.b_y.data(), g.b_y.size(), 1},
  };
}

double batch_loss(const LstmParams& params, std::span<const TrainingSample> batch,
                  Loss loss) {
  double sum = 0.0;
  for (const TrainingSample& s : batch) {
    const LstmTrace trace = lstm_forward(params, s.window);
    sum += loss_value(s.target, trace.prediction, loss);
  }
  return sum / static_cast<double>(batch.size());
}

}  // namespace

BatchGradients bptt_gradients_with_metrics(const LstmParams& params,
                                           std::span<const TrainingSample> batch,
                                           Loss loss) {
  params.validate();
  if (batch.empty()) throw ParameterError("bptt_gradients: empty batch");
  if (uniform_window_shape(batch)) return batched_backward(params, batch, loss);
  LstmGradients acc = LstmGradients::zeros_like(params);
  BatchMetrics metrics;
  for (const TrainingSample& sample : batch) {
    const SampleMetrics m = backward_window(params, sample, loss, acc);
    metrics.loss += m.loss;
    metrics.mae += m.mae;
  }
  const Scalar inv_b = 1.0 / static_cast<Scalar>(batch.size());
  metrics.loss *= inv_b;
  metrics.mae *= inv_b;
  LstmGradients mean_grad = LstmGradients::zeros_like(params);
  mean_grad.add_scaled(acc, inv_b);
  return {std::move(mean_grad), metrics};
}

LstmGradients bptt_gradients(const LstmParams& params,
                             std::span<const TrainingSample> batch, Loss loss) {
  return bptt_gradients_with_metrics(params, batch, loss).gradients;
}

BatchMetrics evaluate_batch(const LstmParams& params,
                            std::span<const TrainingSample> batch, Loss loss) {
  if (batch.empty()) throw ParameterError("evaluate_batch: empty batch");
  BatchMetrics m;
  for (const TrainingSample& s : batch) {
    const LstmTrace trace = lstm_forward(params, s.window);
    m.loss += loss_value(s.target, trace.prediction, loss);
    m.mae += mae_loss(s.target, trace.prediction);
  }
  m.loss /= static_cast<double>(batch.size());
  m.mae /= static_cast<double>(batch.size());
  return m;
}

GradientCheckReport gradient_check_against(const LstmParams& params,
                                           std::span<const TrainingSample> batch,
                                           double epsilon, Loss loss,
                                           const LstmGradients& analytic) {
  if (batch.empty()) throw ParameterError("gradient_check: empty batch");
  if (!(epsilon > 1e-8 && epsilon < 1e-3)) {
    throw ParameterError("gradient_check: epsilon must lie in (1e-8, 1e-3)");
  }

  LstmParams probe = params;
  LstmGradients analytic_copy = analytic;
  auto views = param_views(probe);
  auto grads = gradient_views(analytic_copy);

  GradientCheckReport report;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const Index n = views[v].rows * views[v].cols;
    for (Index k = 0; k < n; ++k) {
      Scalar* coord = views[v].data + k;
      const Scalar saved = *coord;
      *coord = saved + epsilon;
      const double up = batch_loss(probe, batch, loss);
      *coord = saved - epsilon;
      const double down = batch_loss(probe, batch, loss);
      *coord = saved;

      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = grads[v].data[k];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-4});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_parameter = views[v].name;
        report.worst_row = k / views[v].cols;
        report.worst_col = k % views[v].cols;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

GradientCheckReport gradient_check(const LstmParams& params,
                                   std::span<const TrainingSample> batch,
                                   double epsilon, Loss loss) {
  if (batch.empty()) throw ParameterError("gradient_check: empty batch");
  const LstmGradients analytic = bptt_gradients(params, batch, loss);
  return gradient_check_against(params, batch, epsilon, loss, analytic);
}

}  // namespace cryptolab
