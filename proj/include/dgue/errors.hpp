#pragma once

#include <stdexcept>
#include <string>

namespace dgue {

/// Argument lies outside the domain of a mathematical operation
/// (on a support, on an atom, inside a spectrum when outside was required).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed input, configuration or precondition violation.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative method stopped without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : std::runtime_error(what + " (last residual " + std::to_string(last_residual) + ")"),
        last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace dgue
