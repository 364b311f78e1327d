#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace crit {

// Base of every error thrown by the library. The CLI maps the concrete type
// onto an exit status (see cli.hpp).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid argument to an operation (non-finite detuning, bad state, ...).
class InputError : public Error {
public:
  using Error::Error;
};

// Denominator of a reflection coefficient vanished; only reachable with
// perfect mirrors and zero round-trip phase.
class DegenerateConfigurationError : public Error {
public:
  using Error::Error;
};

// Configuration document problems. `line` is 0 when not tied to a line.
class ConfigError : public Error {
public:
  ConfigError(std::string field, const std::string& what, int line = 0)
      : Error(format(field, what, line)), field_(std::move(field)), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

private:
  static std::string format(const std::string& field, const std::string& what, int line) {
    std::string msg;
    if (line > 0) msg += "line " + std::to_string(line) + ": ";
    if (!field.empty()) msg += field + ": ";
    return msg + what;
  }

  std::string field_;
  int line_;
};

// Command-line misuse (unknown flag, conflicting options).
class UsageError : public Error {
public:
  using Error::Error;
};

}  // namespace crit
