// LSTM cell, forward unroll, and reverse-accumulation gradients.
//
// Gate layout: each gate weight has shape hidden x (hidden + input) and acts
// on the concatenation [h_{t-1}, x_t]. The cell recurrence is
//   f_t = sigmoid(W_f [h_{t-1}, x_t] + b_f)
//   i_t = sigmoid(W_i [h_{t-1}, x_t] + b_i)
//   o_t = sigmoid(W_o [h_{t-1}, x_t] + b_o)
//   g_t = tanh   (W_c [h_{t-1}, x_t] + b_c)
//   c_t = f_t . c_{t-1} + i_t . g_t
//   h_t = o_t . tanh(c_t)
// and the prediction is a linear readout of the final hidden state,
// yhat = W_y h_T + b_y.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cryptolab/core/rng.hpp"
#include "cryptolab/core/types.hpp"
#include "cryptolab/losses.hpp"

namespace cryptolab {

struct LstmParams {
  Matrix w_f, w_i, w_o, w_c;  // gates, each hidden x (hidden + input)
  Vector b_f, b_i, b_o, b_c;  // gate biases, length hidden
  Matrix w_y;                 // readout, readout_dim x hidden
  Vector b_y;                 // readout bias
  int hidden_size = 0;
  int input_size = 0;

  Index readout_dim() const { return w_y.rows(); }
  Index concat_dim() const { return hidden_size + input_size; }

  // Throws ShapeError unless all four gate shapes are identical and agree
  // with hidden_size/input_size.
  void validate() const;

  // Seeded uniform init in +-1/sqrt(fan_in); forget-gate bias starts at +1 so
  // the cell state initially retains its memory, other biases start at zero.
  static LstmParams random_init(int hidden_size, int input_size, int readout_dim,
                                SeededRng& rng);
};

struct LstmGates {
  Vector f, i, o, candidate;
};

struct LstmCellResult {
  Vector h, c;
  LstmGates gates;
};

// One timestep of the cell recurrence.
LstmCellResult lstm_cell_step(const LstmParams& params, const Vector& x_t,
                              const Vector& h_prev, const Vector& c_prev);

// Full unroll record: everything the backward pass (and the diagnostics)
// need to replay the computation.
struct LstmTrace {
  std::vector<LstmGates> gates;  // per timestep
  std::vector<Vector> cells;     // c_1 .. c_T
  std::vector<Vector> hiddens;   // h_1 .. h_T
  Matrix inputs;                 // the window, one timestep per row
  Vector prediction;             // W_y h_T + b_y

  Index steps() const { return static_cast<Index>(cells.size()); }
};

// Unrolls the cell over a window (rows = timesteps, cols = features) from
// h_0 = c_0 = 0 and applies the readout to the final hidden state.
LstmTrace lstm_forward(const LstmParams& params, const Matrix& window);

// Elementwise product of the forget gates f_2 .. f_T from a trace: the
// direct-path derivative dc_T/dc_1 carried by the cell-state line.
Vector cell_state_retention(const LstmTrace& trace);

// Gradients shaped like LstmParams.
struct LstmGradients {
  Matrix w_f, w_i, w_o, w_c;
  Vector b_f, b_i, b_o, b_c;
  Matrix w_y;
  Vector b_y;

  static LstmGradients zeros_like(const LstmParams& params);
  LstmGradients& add_scaled(const LstmGradients& other, Scalar scale);
};

struct TrainingSample {
  Matrix window;  // rows = timesteps, cols = features
  Vector target;  // length = readout_dim
};

// Mean gradient of the per-sample loss over the batch, by reverse
// accumulation through all timesteps. The MAE subgradient at an exactly zero
// residual is taken as 0.
LstmGradients bptt_gradients(const LstmParams& params,
                             std::span<const TrainingSample> batch, Loss loss);

// Mean loss and mean absolute error of the batch under the current params.
struct BatchMetrics {
  double loss = 0.0;
  double mae = 0.0;
};
BatchMetrics evaluate_batch(const LstmParams& params,
                            std::span<const TrainingSample> batch, Loss loss);

// Gradients plus the metrics of the same forward passes, so a training step
// needs only one sweep over the batch.
struct BatchGradients {
  LstmGradients gradients;
  BatchMetrics metrics;
};
BatchGradients bptt_gradients_with_metrics(const LstmParams& params,
                                           std::span<const TrainingSample> batch,
                                           Loss loss);

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;  // e.g. "w_f"
  Index worst_row = 0, worst_col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Compares every analytic gradient coordinate against a central finite
// difference of the batch loss. epsilon must lie in (1e-8, 1e-3). Relative
// error denominators are floored at 1e-4 so near-zero coordinates compare
// absolutely at that scale; the floor sits well above the difference
// quotient's rounding noise (~machine epsilon x loss / epsilon) so a clean
// implementation stays orders of magnitude under typical tolerances.
GradientCheckReport gradient_check(const LstmParams& params,
                                   std::span<const TrainingSample> batch,
                                   double epsilon, Loss loss);

// Same comparison against externally supplied analytic gradients; lets a
// caller localize a deliberately corrupted coordinate.
GradientCheckReport gradient_check_against(const LstmParams& params,
                                           std::span<const TrainingSample> batch,
                                           double epsilon, Loss loss,
                                           const LstmGradients& analytic);

}  // namespace cryptolab
