#pragma once

#include <stdexcept>
#include <string>

namespace acatik {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad sizes, parameters or names; never recoverable by retrying.
class InvalidConfiguration : public Error {
 public:
  using Error::Error;
};

/// Index outside the oracle's shape.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// The cross approximation cannot add another nonzero skeleton.
class RankExhausted : public Error {
 public:
  using Error::Error;
};

class SingularTriangular : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// Discrepancy target is at or above the fully regularized residual.
class NoRootAboveRange : public Error {
 public:
  using Error::Error;
};

/// Discrepancy target is below the residual reachable as mu -> 0+.
class NoRootBelowRange : public Error {
 public:
  using Error::Error;
};

}  // namespace acatik
