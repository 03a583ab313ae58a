#pragma once

#include <stdexcept>
#include <string>

namespace unlearn {

// Base error type; subclasses map onto CLI exit codes (see tools/).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration value, unknown enum, malformed schema. Exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Invalid runtime input (empty set, out-of-range label, absent class). Exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

// Dimension mismatch between tensors/models. Exit code 2.
class ShapeError : public InputError {
 public:
  using InputError::InputError;
};

// Artifact fingerprint does not match the target model. Exit code 2.
class CompatibilityError : public InputError {
 public:
  using InputError::InputError;
};

// Filesystem / serialization failure, checksum mismatch. Exit code 3.
class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or other numeric divergence. Exit code 4.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace unlearn
