#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phdinf {

enum class ErrorKind {
  InvalidMatrix,
  NotPositiveDefinite,
  InvalidVector,
  InsufficientData,
  DegenerateLeverage,
  InvalidRank,
  InvalidModel,
  InvalidEpsilon,
  AmbiguousMatch,
  DegenerateSpectrum,
  DegenerateEigenvalue,
  UnsupportedModel,
  UndefinedCorrelation,
  MissingColumn,
  NonNumericCell,
  TooFewRows,
  IoError,
  Usage,
};

std::string_view to_string(ErrorKind kind);

// Process exit code for the CLI: 2 usage, 3 data, 4 numeric degeneracy.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace phdinf
