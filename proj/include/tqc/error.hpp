#pragma once

#include <stdexcept>
#include <string>

namespace tqc {

/// Base class of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller bug: mismatched variable tables, bad indices, loosened profiles.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input (polynomials, rationals, tables, configs).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A target configuration failed one of the model axioms.
class InvalidTarget : public Error {
 public:
  using Error::Error;
};

/// A Δ = 0 invariant outside the three-point, psi-free shape.
class DegenerateKey : public Error {
 public:
  using Error::Error;
};

/// Two data sources disagree on the value of an invariant.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// A series operation whose expansion would not terminate under truncation.
class NonTerminatingSeries : public Error {
 public:
  using Error::Error;
};

}  // namespace tqc
