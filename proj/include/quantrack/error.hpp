#pragma once

#include <stdexcept>
#include <string>

namespace quantrack {

/// Parameters or initial values that break an estimator/tracker invariant.
class ConstraintError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed external input (CSV rows, JSON lines, config values).
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& message, std::size_t line = 0)
      : std::runtime_error(line == 0 ? message
                                     : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A file could not be opened or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace quantrack
