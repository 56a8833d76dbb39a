#pragma once

#include <stdexcept>
#include <string>

namespace saiplab {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller (dimension
/// mismatch, invalid parameter range, ...).
struct ContractViolation : Error {
  using Error::Error;
};

/// Cholesky factorization failed: the matrix is not symmetric positive
/// definite.
struct NotPositiveDefinite : Error {
  using Error::Error;
};

/// A quantity that must be invertible/non-singular degenerated (e.g. a
/// noise-free measurement through a rank-deficient operator).
struct DegenerateError : Error {
  using Error::Error;
};

/// An operation exceeded a configured resource cap.
struct ResourceLimitError : Error {
  using Error::Error;
};

/// Config file could not be parsed or validated. `line` is 1-based,
/// 0 when the error is not tied to a specific line.
struct ConfigError : Error {
  int line = 0;
  explicit ConfigError(const std::string& msg, int line_no = 0)
      : Error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg : msg), line(line_no) {}
};

}  // namespace saiplab
