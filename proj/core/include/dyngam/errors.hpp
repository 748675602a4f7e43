#pragma once

#include <stdexcept>
#include <string>

namespace dyngam {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (x <= 0, q outside (0,1), ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or invalid input data (nonpositive travel time, unknown sensor, missing file).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Dimension mismatch between related containers.
class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

/// An iterative routine failed to converge or arithmetic degenerated (underflow of all
/// particle weights, non-finite log density).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (bad grid, nonsensical MCMC settings).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dyngam
