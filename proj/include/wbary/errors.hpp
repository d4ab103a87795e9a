#pragma once

#include <stdexcept>
#include <string>

namespace wbary {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: dimension mismatch, non-finite entries, broken invariants.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function (t <= 0 for a log, inadmissible q).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Quadrature or root finding failed to reach its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Armijo backtracking ran out of trial steps.
class StepsizeFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace wbary
