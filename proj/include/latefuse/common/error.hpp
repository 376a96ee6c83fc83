#pragma once

#include <stdexcept>
#include <string>

namespace latefuse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input: bad config, unknown key, invalid DSL, bad ranges.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Incompatible tensor or array shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf detected in a state, activation, gradient or loss.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Explicit solver step violates its stability bound.
class CflViolation : public Error {
 public:
  using Error::Error;
};

/// On-disk container problems: version, checksum, size or shape mismatch.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace latefuse
