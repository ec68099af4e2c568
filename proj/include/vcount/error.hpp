#pragma once

#include <stdexcept>
#include <string>

namespace vcount {

// Input or configuration that violates a documented contract. The CLI maps
// these to exit code 1; anything else escaping a command is a runtime fault.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed detection/track record. `line` is 1-based, 0 when unknown.
class StreamError : public ValidationError {
public:
  StreamError(std::size_t line, const std::string& what)
      : ValidationError(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class ConfigError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Frame fed to a tracker out of order.
class SequencingError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Kalman state or innovation that cannot be converted/inverted.
class DegenerateStateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace vcount
