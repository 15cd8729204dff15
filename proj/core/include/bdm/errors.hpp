#pragma once

#include <stdexcept>
#include <string>

namespace bdm {

/// Process exit codes used by the command line tool.
enum class ExitCode : int {
  kPass = 0,
  kVerdictFail = 2,
  kIo = 10,
  kConfig = 11,
  kNumerical = 12,
};

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  [[nodiscard]] virtual ExitCode exit_code() const noexcept { return ExitCode::kNumerical; }
};

/// A model, weight or algorithm parameter lies outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kConfig; }
};

/// Requested density is at or above the critical density.
class SupercriticalError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kConfig; }
};

/// Integration or series evaluation broke down.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A concentration is positive where the reference profile vanishes.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::size_t index) : Error(what), index_(index) {}
  [[nodiscard]] std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kConfig; }
};

class IoError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::kIo; }
};

}  // namespace bdm
