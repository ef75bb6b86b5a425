// Dense numeric types used throughout the library. Everything is 64-bit
// floating point; matrices are row-major dense storage backed by Eigen.
#pragma once

#include <Eigen/Dense>
#include <sstream>
#include <string>

#include "cryptolab/core/errors.hpp"

namespace cryptolab {

using Scalar = double;
using Index = Eigen::Index;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Derived>
std::string shape_string(const Eigen::MatrixBase<Derived>& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

// Matrix product with an explicit conformance check. Throws ShapeError naming
// both operand shapes on mismatch.
template <typename DerivedA, typename DerivedB>
Matrix matmul(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: incompatible shapes " + shape_string(a) + " and " +
                     shape_string(b));
  }
  return a * b;
}

}  // namespace cryptolab
