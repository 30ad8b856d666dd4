#pragma once

#include <stdexcept>
#include <string>

namespace condensa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or precondition violated by the caller.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A matrix that had to be symmetric positive definite was not.
class NotSpdError : public Error {
 public:
  using Error::Error;
};

/// A local (per-cell) block could not be factorized.
class SingularBlockError : public Error {
 public:
  SingularBlockError(long cell, const std::string& what)
      : Error("cell " + std::to_string(cell) + ": " + what), cell_(cell) {}
  long cell() const noexcept { return cell_; }

 private:
  long cell_;
};

/// Krylov breakdown (non-positive curvature, loss of definiteness).
class BreakdownError : public Error {
 public:
  using Error::Error;
};

}  // namespace condensa
