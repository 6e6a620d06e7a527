#pragma once

#include <stdexcept>
#include <string>

namespace hyperflow {

// Malformed input: bad file syntax, out-of-range indices, negative weights,
// invalid configuration values. The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A computation that could not be completed: singular Jacobians, Newton
// divergence, integrator blow-up. The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The interaction structure does not admit the requested object, e.g. ratio
// propagation finds inconsistent cycles or the support graph is disconnected.
class StructuralError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConnectivityError : public StructuralError {
 public:
  using StructuralError::StructuralError;
};

// Integration step failure; carries the time at which it occurred.
class StepError : public NumericalError {
 public:
  StepError(const std::string& what, double t)
      : NumericalError(what + " (t = " + std::to_string(t) + ")"), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace hyperflow
