#pragma once

#include <stdexcept>
#include <string>

namespace mmt {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed caller input: dimension mismatch, point outside the state
/// space, bad grids, endpoint mismatch.
struct InputError : Error {
  using Error::Error;
};

/// Evaluation requested at a point where the quantity degenerates
/// (boundary of the state space, families without boundary extension).
struct DegeneratePointError : Error {
  using Error::Error;
};

/// Problem is structurally infeasible for the model (e.g. mass mismatch
/// between endpoints under no-flux boundary conditions).
struct ModelError : Error {
  using Error::Error;
};

/// A solver failed to produce a usable result (CFL violation, divergence).
struct NumericalError : Error {
  using Error::Error;
};

/// Run-configuration schema violation; `where` is a JSON-pointer-ish path.
struct ConfigError : Error {
  explicit ConfigError(const std::string& where, const std::string& what)
      : Error(where + ": " + what), where(where) {}
  std::string where;
};

}  // namespace mmt
