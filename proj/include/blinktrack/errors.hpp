#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace blinktrack {

// Malformed input file; `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class VersionMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Semantically invalid configuration; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scenario description that cannot be generated.
class InvalidConfig : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace blinktrack
