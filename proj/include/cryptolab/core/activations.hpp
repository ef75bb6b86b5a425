// Elementwise activation functions and their first derivatives.
#pragma once

#include <cmath>
#include <string>

#include "cryptolab/core/errors.hpp"
#include "cryptolab/core/types.hpp"

namespace cryptolab {

enum class Activation { Sigmoid, Tanh, Linear };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::Linear: return "linear";
  }
  return "unknown";
}

inline Activation activation_from_string(const std::string& name) {
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  if (name == "linear") return Activation::Linear;
  throw ParameterError("unknown activation: " + name);
}

inline Scalar sigmoid(Scalar x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Scalar sigmoid_prime(Scalar x) {
  const Scalar s = sigmoid(x);
  return s * (1.0 - s);
}

inline Scalar tanh_prime(Scalar x) {
  const Scalar t = std::tanh(x);
  return 1.0 - t * t;
}

inline Scalar activation_value(Scalar x, Activation kind) {
  switch (kind) {
    case Activation::Sigmoid: return sigmoid(x);
    case Activation::Tanh: return std::tanh(x);
    case Activation::Linear: return x;
  }
  return x;
}

inline Scalar activation_derivative(Scalar x, Activation kind) {
  switch (kind) {
    case Activation::Sigmoid: return sigmoid_prime(x);
    case Activation::Tanh: return tanh_prime(x);
    case Activation::Linear: return 1.0;
  }
  return 1.0;
}

// Applies the activation (or its derivative) elementwise. Derivatives are
// evaluated at the raw input x, e.g. derivative=true with Sigmoid yields
// sigmoid'(x) = sigmoid(x) * (1 - sigmoid(x)).
template <typename Derived>
Matrix apply_activation(const Eigen::MatrixBase<Derived>& m, Activation kind,
                        bool derivative = false) {
  Matrix out(m.rows(), m.cols());
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      const Scalar x = m(r, c);
      out(r, c) = derivative ? activation_derivative(x, kind) : activation_value(x, kind);
    }
  }
  return out;
}

}  // namespace cryptolab
