// Vanilla recurrent network: forward pass and gradient-flow diagnostics.
//
// The state recurrence is s_t = act(W_x x_t + W_s s_{t-1} + b1) with output
// o_t = W_out s_t + b2. The linear activation reproduces the bare recurrence
// (no nonlinearity in the neuron); tanh is the gated variant. The gradient
// flow profile exposes the per-step Jacobians ds_t/ds_{t-1} and their running
// product, which is the quantity whose decay or growth drives gradient
// vanishing and explosion in long unrolls.
#pragma once

#include <vector>

#include "cryptolab/core/activations.hpp"
#include "cryptolab/core/types.hpp"

namespace cryptolab {

struct RnnParams {
  Matrix w_x;      // input -> state
  Matrix w_s;      // state -> state, square
  Vector b1;       // state bias
  Matrix w_out;    // state -> output
  Vector b2;       // output bias
  Activation activation = Activation::Linear;

  Index state_dim() const { return w_s.rows(); }
  Index input_dim() const { return w_x.cols(); }
  Index output_dim() const { return w_out.rows(); }

  // Throws ShapeError unless W_s is square and all shapes agree.
  void validate() const;

  // One-neuron network, handy for the scalar analyses.
  static RnnParams scalar(Scalar wx, Scalar ws, Scalar b1v, Scalar wo, Scalar b2v,
                          Activation activation);
};

struct RnnTrace {
  std::vector<Vector> states;   // s_1 .. s_T
  std::vector<Vector> outputs;  // o_1 .. o_T
  Vector initial_state;         // s_0
};

RnnTrace rnn_forward(const RnnParams& params, const std::vector<Vector>& inputs,
                     const Vector& s0);

// Per-step Jacobians ds_j/ds_{j-1} for j = 2..T and their running product.
struct GradientFlowProfile {
  std::vector<Matrix> step_jacobians;    // T-1 factors
  std::vector<double> cumulative_norms;  // Frobenius norm of each running product
  Matrix cumulative;                     // ds_T/ds_1

  // Scalar convenience accessor; requires a one-neuron network.
  double cumulative_factor() const;
};

// Gradient flow along the trajectory realized by the given inputs.
GradientFlowProfile rnn_gradient_flow(const RnnParams& params,
                                      const std::vector<Vector>& inputs,
                                      const Vector& s0);

// Gradient flow along the all-zero trajectory (zero inputs, zero initial
// state). At that operating point every tanh derivative is 1, so each factor
// reduces to W_s itself and the cumulative product is a pure power of W_s.
// seq_len must be >= 2.
GradientFlowProfile rnn_gradient_flow(const RnnParams& params, int seq_len);

}  // namespace cryptolab
