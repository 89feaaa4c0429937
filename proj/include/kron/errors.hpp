#pragma once

#include <stdexcept>
#include <string>

namespace kron {

/// Failure categories; the CLI maps them onto exit codes 1, 2 and 3.
enum class ErrorKind {
  domain = 1,     ///< valid input that violates a mathematical precondition
  input = 2,      ///< malformed or inconsistent input
  numerical = 3,  ///< solver failure (non-convergence, singular operator, ...)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorKind::input, what) {}
};

/// Malformed input (unparsable file, missing field, bad option value).
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

class SymmetryError : public Error {
 public:
  explicit SymmetryError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Fixed-point / Newton iteration did not reach its tolerance.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : NumericalError(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// A linear (super)operator is too ill-conditioned to invert reliably.
class SingularOperatorError : public NumericalError {
 public:
  SingularOperatorError(const std::string& what, double condition)
      : NumericalError(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

}  // namespace kron
