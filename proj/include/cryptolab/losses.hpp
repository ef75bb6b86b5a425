// Loss functions for model training and evaluation.
#pragma once

#include <string>

#include "cryptolab/core/errors.hpp"
#include "cryptolab/core/types.hpp"

namespace cryptolab {

enum class Loss { Mae, Sse };

inline std::string to_string(Loss l) { return l == Loss::Mae ? "mae" : "sse"; }

inline Loss loss_from_string(const std::string& name) {
  if (name == "mae") return Loss::Mae;
  if (name == "sse") return Loss::Sse;
  throw ParameterError("unknown loss: " + name);
}

// Half sum of squared errors: 1/2 * sum (y_i - o_i)^2.
Scalar sse_loss(const Vector& y, const Vector& o);

// Mean absolute error: 1/m * sum |y_i - yhat_i|.
Scalar mae_loss(const Vector& y, const Vector& yhat);

}  // namespace cryptolab
