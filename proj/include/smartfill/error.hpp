#pragma once

#include <stdexcept>
#include <string>

namespace malleable {

// Base for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the function's domain [0, B].
class DomainError : public Error {
 public:
  using Error::Error;
};

// Marginal rate outside [s'(B), s'(0)].
class RangeError : public Error {
 public:
  using Error::Error;
};

class InvalidInstance : public Error {
 public:
  using Error::Error;
};

// Water level bracket could not be established; the speedup function is
// most likely not a validated concave function.
class BracketFailure : public Error {
 public:
  using Error::Error;
};

class InfeasibleSchedule : public Error {
 public:
  using Error::Error;
};

class FamilyError : public Error {
 public:
  using Error::Error;
};

class FitFailure : public Error {
 public:
  using Error::Error;
};

class OptimizerFailure : public Error {
 public:
  using Error::Error;
};

// Malformed input document.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a model axiom or ordering rule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace malleable
