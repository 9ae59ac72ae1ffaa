#pragma once

#include <stdexcept>
#include <string>

namespace aorl {

/// Base of every error thrown by the library. The CLI maps subclasses onto
/// process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value (negative r0, oversized aperture, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Shapes or sampling grids that do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or otherwise unusable input data.
class InputError : public Error {
 public:
  using Error::Error;
};

/// API used out of order, e.g. stepping a finished episode.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A training update produced a non-finite loss or parameter.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace aorl
