#pragma once

// Internal primal-dual engine for the staggered Benamou-Brenier problems:
// fixed-endpoint distance solves and free-terminal implicit (JKO) steps.
// Not installed; consumed by transport.cpp and jko.cpp.

#include <functional>
#include <optional>

#include "mmt/transport.hpp"

namespace mmt::detail {

/// Per-cell strongly convex endpoint term (free-terminal mode); `weight`
/// multiplies every cell value and already contains the dx quadrature factor.
struct EndpointObjective {
  double weight = 1.0;
  const StateSpace* space = nullptr;
  std::function<double(int cell, const Vector& z)> value;
  std::function<void(int cell, const Vector& z, Vector& grad, Matrix& hess)> derivatives;
};

struct StaggeredProblem {
  const MobilityModel* model = nullptr;
  Grid1D grid;
  int steps = 0;            // K
  double phi_weight = 1.0;  // multiplies the path energy in the objective
  Matrix mu_start;          // N x n
  std::optional<Matrix> mu_end;                 // fixed-endpoint mode
  const EndpointObjective* endpoint = nullptr;  // free-terminal mode
  ActionConfig action;
};

struct PdhgStats {
  int iterations = 0;
  bool converged = false;
  double gap = 0.0;
  double path_energy = 0.0;     // exact extended-real rescoring
  double endpoint_value = 0.0;  // endpoint objective at the terminal slice
  double residual = 0.0;
  bool mollified = false;
  double interior_lift = 0.0;  // theta of the interior blend, 0 when unused
};

PdhgStats pdhg_solve(const StaggeredProblem& prob, const SolverOptions& opts,
                     TransportPath& out);

/// Componentwise discrete heat-kernel smoothing (nearest-value extension,
/// kernel normalized to unit mass); used to mollify stalled endpoints and by
/// the pde module's heat flow.
Matrix gaussian_smooth(const Grid1D& grid, const Matrix& values, double t);

}  // namespace mmt::detail
