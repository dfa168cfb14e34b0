#pragma once

#include <stdexcept>
#include <string>

namespace rff {

// Error taxonomy, mirrored by the CLI exit codes:
//   ConfigError -> 1, DataError -> 2, NumericalError -> 3, IoError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed, inconsistent, or insufficient data (bad magic, truncated
// payload, count mismatch, capacity, degenerate pools, shape mismatch).
class DataError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegeneracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// The 2N == n ridgeless limit is singular and has no gamma solution.
class PhaseBoundaryError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rff
