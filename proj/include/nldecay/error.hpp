#pragma once

#include <stdexcept>
#include <string>

namespace nldecay {

/// Base of every error thrown by the library. The CLI maps these to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument violates an operation precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Evaluation point lies below a function's domain start.
class DomainError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// A function produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Kernel features are finer than the grid can represent.
class ResolutionError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Convolution power would wrap around the periodic domain.
class PeriodizationError : public ArgumentError {
 public:
  PeriodizationError(const std::string& what, int k, double estimate)
      : ArgumentError(what), k_(k), estimate_(estimate) {}
  int k() const noexcept { return k_; }
  double estimate() const noexcept { return estimate_; }

 private:
  int k_;
  double estimate_;
};

/// Series evaluation requested beyond the configured cost limit.
class CostError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Least-squares fit impossible on the given data.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Input data unusable (non-positive norms, mismatched lengths).
class DataError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Internal invariant tripped; signals a bug rather than bad input.
class NumericalGuard : public Error {
 public:
  using Error::Error;
};

}  // namespace nldecay
