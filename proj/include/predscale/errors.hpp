#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace predscale {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }
  /// Message without the line prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

/// Well-formed input that violates a domain invariant (negative timestamp,
/// overflowing field, out-of-range parameter).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Binary input that ends in the middle of a record.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// A forecaster was asked to predict from too little history.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// A time-ordered feed received an entry older than its newest one.
class OrderingError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration. Raised before any load is sent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Anything that prevents an experiment from starting: unreadable trace,
/// unreachable live target, port already bound.
class StartupError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure with the path in the message.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace predscale
