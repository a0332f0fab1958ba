#pragma once

#include <stdexcept>
#include <string>

namespace sslzsl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A direct factorization hit a pivot below tolerance.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents; the message carries line/offset.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Inputs violate a documented precondition (empty class, bad range, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Training produced a NaN/Inf loss term.
class NonFiniteLossError : public Error {
 public:
  using Error::Error;
};

}  // namespace sslzsl
