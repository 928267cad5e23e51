#pragma once

#include <stdexcept>
#include <string>

namespace evospike {

// Error categories map 1:1 onto CLI exit codes.
enum class ErrorCategory : int {
  other = 1,
  config = 2,
  io = 3,
  numeric = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

// Malformed or out-of-range configuration (bad field values, bad flags).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorCategory::config, message) {}
};

// Genotype encoding problems: wrong gene count, genes outside [0,1],
// unknown layout version.
class EncodingError : public Error {
 public:
  explicit EncodingError(const std::string& message)
      : Error(ErrorCategory::config, message) {}
};

// Filesystem and file-format failures.
class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorCategory::io, message) {}
};

// Numerical divergence (non-finite state). Signals a bad genotype or an
// unstable step size, not a programming error.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message)
      : Error(ErrorCategory::numeric, message) {}
};

}  // namespace evospike
