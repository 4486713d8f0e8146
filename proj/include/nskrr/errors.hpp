#pragma once

#include <stdexcept>
#include <string>

namespace nskrr {

// Precondition violated by the caller (bad sizes, empty inputs, out-of-range
// indices, invalid parameters).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A point lies outside the interval a kernel or density is defined on.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Factorization or solve failure, degenerate statistics.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Division by a density that vanishes where the integrand does not.
class SingularityError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Scenario configuration problem. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace nskrr
