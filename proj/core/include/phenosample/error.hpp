#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phenosample {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value or unknown configuration key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A persisted artifact violates one of its invariants. `rule()` names it.
class ValidationError : public Error {
 public:
  ValidationError(std::string rule, const std::string& detail);
  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string rule_;
};

/// A record or file could not be decoded. `line()` is 1-based, 0 if unknown.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Network failure that survived all retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure; the message carries the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure during optimisation (non-finite loss, etc).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace phenosample
