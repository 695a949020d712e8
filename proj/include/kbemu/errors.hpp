#pragma once

#include <stdexcept>
#include <string>

namespace kbemu {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied something outside an operation's contract.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class ShapeError : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

class DomainError : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

class MisuseError : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

class DegenerateConfiguration : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

class ConfigError : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

// Failures of the numerics themselves, as opposed to bad input.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConditioningError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NumericalConsistencyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EmulatorInconsistency : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ModelEvaluationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StiffnessError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace kbemu
