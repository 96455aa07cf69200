#pragma once

#include <stdexcept>
#include <string>

namespace bdex {

/// Shape or index mismatch between objects that must agree.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An argument lies outside the domain where the operation is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative solver failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Invalid configuration detected before any work starts.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical run produced values outside their admissible set.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quadratic form is singular beyond the applied regularization.
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested object exceeds a documented size cap.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace bdex
