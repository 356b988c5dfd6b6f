#pragma once

#include <stdexcept>
#include <string>

namespace spinstar {

/// Base class for all library failures that carry a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept = 0;
};

/// Malformed or inconsistent scenario input.
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

/// Solver breakdown: non-convergence, non-finite values.
class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// A request exceeds a configured resource guard (bath size, step count).
class GuardError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

}  // namespace spinstar
