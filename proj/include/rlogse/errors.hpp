#pragma once

#include <stdexcept>
#include <string>

namespace rlogse {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-facing parameters: bad grid sizes, bad model constants,
// malformed config files, unknown study names, inapplicable overrides.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Two fields (or a field and an operator) built on different grids were
// combined.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A per-mode stage matrix lost invertibility during factorization.
class SingularModeError : public Error {
 public:
  SingularModeError(const std::string& what, long mode) : Error(what), mode_(mode) {}
  long mode() const noexcept { return mode_; }

 private:
  long mode_;
};

// The nonlinear correction failed: Newton divergence, non-finite iterates,
// or a degenerate search direction that survived the Jacobian fallback.
class SolverError : public Error {
 public:
  using Error::Error;
};

// Snapshot/CSV/manifest encoding or decoding failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rlogse
