#pragma once

#include <stdexcept>
#include <string>

namespace pcrlb {

// Root of the library's exception hierarchy. The CLI maps each category to a
// distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration: bad dimensions, non-PD covariances, unknown model.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown: singular information matrices, degenerate particle
// clouds, non-finite model output.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A model map returned NaN/Inf for a valid input.
class ModelEvaluationError : public NumericalError {
 public:
  ModelEvaluationError(const std::string& what, long time_index)
      : NumericalError(what), time_index_(time_index) {}
  long time_index() const { return time_index_; }

 private:
  long time_index_;
};

// Every particle weight underflowed to zero.
class DegeneracyError : public NumericalError {
 public:
  DegeneracyError(const std::string& what, long time_index)
      : NumericalError(what), time_index_(time_index) {}
  long time_index() const { return time_index_; }

 private:
  long time_index_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcrlb
