#include "cryptolab/rnn.hpp"

#include "cryptolab/core/errors.hpp"

namespace cryptolab {

void RnnParams::validate() const {
  if (w_s.rows() != w_s.cols()) {
    throw ShapeError("RnnParams: W_s must be square, got " + shape_string(w_s));
  }
  if (w_x.rows() != w_s.rows()) {
    throw ShapeError("RnnParams: W_x rows " + shape_string(w_x) +
                     " must match W_s " + shape_string(w_s));
  }
  if (b1.size() != w_s.rows()) {
    throw ShapeError("RnnParams: b1 length must equal state dimension");
  }
  if (w_out.cols() != w_s.rows()) {
    throw ShapeError("RnnParams: W_out cols " + shape_string(w_out) +
                     " must match state dimension");
  }
  if (b2.size() != w_out.rows()) {
    throw ShapeError("RnnParams: b2 length must equal output dimension");
  }
}

RnnParams RnnParams::scalar(Scalar wx, Scalar ws, Scalar b1v, Scalar wo, Scalar b2v,
                            Activation activation) {
  RnnParams p;
  p.w_x = Matrix::Constant(1, 1, wx);
  p.w_s = Matrix::Constant(1, 1, ws);
  p.b1 = Vector::Constant(1, b1v);
  p.w_out = Matrix::Constant(1, 1, wo);
  p.b2 = Vector::Constant(1, b2v);
  p.activation = activation;
  return p;
}

RnnTrace rnn_forward(const RnnParams& params, const std::vector<Vector>& inputs,
                     const Vector& s0) {
  params.validate();
  if (s0.size() != params.state_dim()) {
    throw ShapeError("rnn_forward: initial state has length " +
                     std::to_string(s0.size()) + ", expected " +
                     std::to_string(params.state_dim()));
  }
  RnnTrace trace;
  trace.initial_state = s0;
  trace.states.reserve(inputs.size());
  trace.outputs.reserve(inputs.size());
  Vector state = s0;
  for (const Vector& x : inputs) {
    if (x.size() != params.input_dim()) {
      throw ShapeError("rnn_forward: input has length " + std::to_string(x.size()) +
                       ", expected " + std::to_string(params.input_dim()));
    }
    const Vector pre = params.w_x * x + params.w_s * state + params.b1;
    state = apply_activation(pre, params.activation);
    trace.states.push_back(state);
    trace.outputs.push_back(params.w_out * state + params.b2);
  }
  return trace;
}

double GradientFlowProfile::cumulative_factor() const {
  if (cumulative.rows() != 1 || cumulative.cols() != 1) {
    throw ShapeError("cumulative_factor: defined only for one-neuron networks, got " +
                     shape_string(cumulative));
  }
  return cumulative(0, 0);
}

GradientFlowProfile rnn_gradient_flow(const RnnParams& params,
                                      const std::vector<Vector>& inputs,
                                      const Vector& s0) {
  params.validate();
  if (inputs.size() < 2) {
    throw ParameterError("rnn_gradient_flow: sequence length must be >= 2");
  }
  const Index n = params.state_dim();

  GradientFlowProfile profile;
  profile.cumulative = Matrix::Identity(n, n);

  // Forward pass, collecting the Jacobian ds_j/ds_{j-1} = diag(act'(pre_j)) W_s
  // at each realized pre-activation. The factor for j = 1 is excluded: the
  // product tracks ds_T/ds_1.
  Vector state = s0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const Vector pre = params.w_x * inputs[t] + params.w_s * state + params.b1;
    if (t > 0) {
      const Matrix jac =
          apply_activation(pre, params.activation, /*derivative=*/true).asDiagonal() *
          params.w_s;
      profile.cumulative = jac * profile.cumulative;
      profile.step_jacobians.push_back(jac);
      profile.cumulative_norms.push_back(profile.cumulative.norm());
    }
    state = apply_activation(pre, params.activation);
  }
  return profile;
}

GradientFlowProfile rnn_gradient_flow(const RnnParams& params, int seq_len) {
  if (seq_len < 2) {
    throw ParameterError("rnn_gradient_flow: sequence length must be >= 2, got " +
                         std::to_string(seq_len));
  }
  const std::vector<Vector> zeros(static_cast<std::size_t>(seq_len),
                                  Vector::Zero(params.input_dim()));
  return rnn_gradient_flow(params, zeros, Vector::Zero(params.state_dim()));
}

}  // namespace cryptolab
