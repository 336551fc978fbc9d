#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace storegrid {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected input: malformed files, layout invariant violations, bad arguments.
/// The CLI maps this to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A well-formed request that cannot be carried out (unreachable item,
/// solver cap exceeded, calibration failure, non-finite value).
class RuntimeError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

class CalibrationError : public RuntimeError {
 public:
  CalibrationError(const std::string& what, double achieved)
      : RuntimeError(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

}  // namespace storegrid
