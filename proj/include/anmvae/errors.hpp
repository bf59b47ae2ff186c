#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace anmvae {

/// Invalid shapes, dimensions, or configuration values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value left the domain an operation is defined on (non-SPD matrix,
/// division by zero, ...). `value()` carries the offending quantity.
class NumericalDomainError : public std::runtime_error {
 public:
  NumericalDomainError(const std::string& what, double value)
      : std::runtime_error(what), value_(value) {}

  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Malformed mechanism expression.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset, std::vector<std::string> expected);

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Filesystem failures and malformed on-disk artifacts.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checkpoint magic or version does not match.
class VersionError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace anmvae
