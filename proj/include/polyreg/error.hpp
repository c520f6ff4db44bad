#pragma once

#include <stdexcept>
#include <string>

namespace polyreg {

// Base class for every error raised by the library. The CLI maps the
// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files, flags or JSON documents.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A matrix that must span the ambient space does not.
class RankError : public Error {
 public:
  using Error::Error;
};

// Any other violated precondition (negative threshold, bad mask density...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Operation requested on a potential kind that does not support it.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// A functional vanished on a nonzero probe.
class NotANormError : public Error {
 public:
  using Error::Error;
};

// An iterative solver produced a non-finite iterate.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace polyreg
