#pragma once

#include <stdexcept>
#include <string>

namespace coco {

// Base of every failure raised by the library. Callers that only care about
// "something numerical went wrong" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A NestedIntersection whose stored witness is not inside every member.
class EmptySetError : public Error {
 public:
  using Error::Error;
};

// An iterative projection ran out of cycles. `residual` is the last
// convergence measure so callers can report how far off it was.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Linear maximization over a set that is not bounded in the requested direction.
class UnboundedError : public Error {
 public:
  using Error::Error;
};

class DegenerateConfigurationError : public Error {
 public:
  using Error::Error;
};

class InfeasibleComparatorError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class MonotonicityUnattainableError : public Error {
 public:
  using Error::Error;
};

// Invalid user-facing configuration (bad family name, missing field, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace coco
