#pragma once

#include <stdexcept>
#include <string>

namespace rts {

/// Malformed configuration text. Carries the 1-based line number.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// A Scene that parsed but violates one of its invariants.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The simulation left its valid state (particle outside domain, non-finite
/// density, iteration cap exceeded). Maps to CLI exit code 2.
class NumericalAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rts
