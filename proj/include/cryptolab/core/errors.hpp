// Error taxonomy shared by every module. All failures surface as exceptions
// derived from Error so callers can catch the whole family or a single kind.
#pragma once

#include <stdexcept>
#include <string>

namespace cryptolab {

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Dimension mismatch between operands.
class ShapeError : public Error {
public:
  explicit ShapeError(const std::string& what) : Error(what) {}
};

// Invalid argument value (out-of-range count, bad fraction, ...).
class ParameterError : public Error {
public:
  explicit ParameterError(const std::string& what) : Error(what) {}
};

// Malformed or inconsistent input data (CSV rows, duplicate dates, ...).
class DataError : public Error {
public:
  explicit DataError(const std::string& what) : Error(what) {}
};

// Missing or unrecognizable schema elements (CSV header columns).
class SchemaError : public Error {
public:
  explicit SchemaError(const std::string& what) : Error(what) {}
};

// Optimization produced a non-finite loss.
class TrainingError : public Error {
public:
  explicit TrainingError(const std::string& what) : Error(what) {}
};

// A statistical estimate is undefined (degenerate variance, ...).
class EstimationError : public Error {
public:
  explicit EstimationError(const std::string& what) : Error(what) {}
};

// A diagnostic cannot be computed on the given inputs.
class DiagnosticError : public Error {
public:
  explicit DiagnosticError(const std::string& what) : Error(what) {}
};

// Filesystem-level failure, carries the offending path.
class FileError : public Error {
public:
  explicit FileError(const std::string& what) : Error(what) {}
};

}  // namespace cryptolab
