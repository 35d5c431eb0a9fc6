#pragma once

#include <stdexcept>
#include <string>

namespace csplit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: unknown problem id, malformed ladder, non-integer step count.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A feature that is declared by a type but not discretized (Neumann/Robin).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Krylov exponential did not reach the requested tolerance within its budget.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Exact source flow hit a pole (logistic denominator vanishes).
class SingularFlowError : public Error {
 public:
  SingularFlowError(const std::string& what, std::size_t node)
      : Error(what), node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// Sparse factorization failed or the matrix is numerically singular.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, double condition_estimate)
      : Error(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

}  // namespace csplit
