#pragma once

#include <stdexcept>
#include <string>

namespace walklearn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside its documented domain (n < 2, odd N, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Malformed input data: bad IDX magic, truncated files, unparsable JSON.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A randomized construction failed after its retry budget.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// A run configuration failed validation. The message names the field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace walklearn
