#pragma once

#include <stdexcept>
#include <string>

namespace pdrssn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A tangent vector was used at a point other than the one it is anchored at.
class AnchorError : public Error {
 public:
  using Error::Error;
};

/// log (and everything built on it) is undefined for the given pair of points.
class InjectivityError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input (shapes, parameters, serialized data).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An experiment configuration is invalid or cannot be parsed.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pdrssn
