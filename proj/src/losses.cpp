#include "cryptolab/losses.hpp"

#include <cmath>

namespace cryptolab {

Scalar sse_loss(const Vector& y, const Vector& o) {
  if (y.size() != o.size()) {
    throw ShapeError("sse_loss: length mismatch " + shape_string(y) + " vs " +
                     shape_string(o));
  }
  Scalar sum = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    const Scalar d = y[i] - o[i];
    sum += d * d;
  }
  return 0.5 * sum;
}

Scalar mae_loss(const Vector& y, const Vector& yhat) {
  if (y.size() != yhat.size()) {
    throw ShapeError("mae_loss: length mismatch " + shape_string(y) + " vs " +
                     shape_string(yhat));
  }
  if (y.size() == 0) throw ParameterError("mae_loss: empty input");
  Scalar sum = 0.0;
  for (Index i = 0; i < y.size(); ++i) sum += std::abs(y[i] - yhat[i]);
  return sum / static_cast<Scalar>(y.size());
}

}  // namespace cryptolab
