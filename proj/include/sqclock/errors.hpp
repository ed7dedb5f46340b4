#pragma once

#include <stdexcept>
#include <string>

namespace sqclock {

// Bad or inconsistent input parameters (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure while evaluating the model itself (CLI exit code 3).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A domain-type invariant does not hold, e.g. |M| > sqrt(N(N+1)).
class ConstraintViolation : public ModelError {
 public:
  using ModelError::ModelError;
};

// Integrator step too coarse for the fastest rate in the problem.
class IntegrationStepError : public ModelError {
 public:
  using ModelError::ModelError;
};

// 1 + xi*S <= 0: the squeezed S/N formula is outside its validity domain.
class UnphysicalDenominator : public ModelError {
 public:
  using ModelError::ModelError;
};

class DivisionError : public ModelError {
 public:
  using ModelError::ModelError;
};

class FitError : public ModelError {
 public:
  using ModelError::ModelError;
};

}  // namespace sqclock
