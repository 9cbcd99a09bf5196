#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stgof {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (carries a line number in the message).
class ParseError : public Error {
 public:
  using Error::Error;
};

// A precondition of an operation was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Refitting failed: an empty cluster or a zero block/row sum makes the
// closed-form estimates undefined.
class RefitError : public Error {
 public:
  using Error::Error;
};

// Iterative eigensolver did not reach the requested tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, std::vector<double> achieved)
      : Error(msg), residuals(std::move(achieved)) {}
  std::vector<double> residuals;
};

}  // namespace stgof
