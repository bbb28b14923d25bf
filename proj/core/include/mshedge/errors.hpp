#pragma once

#include <stdexcept>
#include <string>

namespace mshedge {

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kDependency = 3,
  kNumerical = 4,
};

/// Base class of every error raised by the library. Each subclass maps onto
/// one exit code so the CLI can translate failures without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

/// Invalid configuration: bad ranges, violated invariants, unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kConfig; }
};

/// Malformed or inconsistent input data (length mismatch, parse failure).
class InputError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kConfig; }
};

/// A stage needs an artifact that is missing or belongs to another config.
class DependencyError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kDependency; }
};

/// Non-finite intermediates, quadrature failure, training divergence.
class NumericalError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kNumerical; }
};

/// A CSV/text parse failure that knows where it happened.
class ParseError : public InputError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace mshedge
