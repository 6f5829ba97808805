#pragma once

#include <stdexcept>
#include <string>

namespace rdson {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed, missing or otherwise unusable input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A trace is too short for the requested window.
class InsufficientDataError : public DataError {
 public:
  using DataError::DataError;
};

/// CSV or text-format parse failure; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Normalizer cannot be fitted because the value range is empty.
class DegenerateRangeError : public DataError {
 public:
  using DataError::DataError;
};

/// Loss or gradient became non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A metric is not defined for the supplied data (e.g. threshold never crossed).
class MetricUndefinedError : public Error {
 public:
  using Error::Error;
};

/// Particle population collapsed.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Model snapshot could not be decoded.
class DecodeError : public Error {
 public:
  using Error::Error;
};

class BadMagicError : public DecodeError {
 public:
  using DecodeError::DecodeError;
};

class ChecksumError : public DecodeError {
 public:
  using DecodeError::DecodeError;
};

class ConfigIncompatibleError : public DecodeError {
 public:
  using DecodeError::DecodeError;
};

/// Invalid configuration value or missing required option.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rdson
