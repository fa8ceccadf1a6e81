#pragma once

#include <utility>
#include <vector>

#include "mmt/jko.hpp"

namespace mmt {

struct FdConfig {
  double dt = 0.0;  // <= 0: automatic CFL step
  double cfl_safety = 0.25;
  bool clamp_midpoints = true;
  int record_stride = 1;
};

/// Recorded explicit finite-difference trajectory. `dissipation_budget[m]`
/// accumulates dt * (C_f |dmu|^2 + <d eta, d mu>) over the steps between
/// records m and m+1 (forward differences), so entropy-dissipation checks
/// replay from the record alone.
struct FdTrajectory {
  Grid1D grid;
  double dt = 0.0;
  int total_steps = 0;
  std::vector<double> times;
  std::vector<Matrix> states;
  std::vector<double> heat_entropies;
  std::vector<double> dissipation_budget;
  double max_projection = 0.0;

  int records() const { return static_cast<int>(times.size()); }
  GridDensity state_at_record(int m) const { return GridDensity{grid, states.at(m)}; }
  /// Linear interpolation between records.
  Matrix state_at(double t) const;
};

/// Conservative explicit scheme for
///   d_t mu = d_x( M(mu) hess f(mu) d_x mu + M(mu) d_x eta )
/// with no-flux boundary, midpoint states clamped to S, and values projected
/// onto S after each step (projection magnitude logged).
FdTrajectory fd_solve(const MobilityModel& model, const EnergySpec& spec,
                      const GridDensity& mu0, double t_final, const FdConfig& cfg = {});

/// Componentwise heat-kernel convolution (unit diffusivity), nearest-value
/// boundary extension, kernel normalized to unit mass; t = 0 is the identity.
GridDensity heat_solve(const GridDensity& mu0, double t);

/// Conservative explicit scheme for the regularized transport equation
///   d_t mu = alpha d_xx mu + d_x( M(mu) d_x rho ).
FdTrajectory transport_solve(const MobilityModel& model, double alpha,
                             const std::vector<Expr>& rho, const GridDensity& mu0,
                             double t_final, const FdConfig& cfg = {});

/// Evolves both inputs by the heat flow for time t and returns the distance
/// before and after (0-flow contraction probe for models induced by h).
std::pair<double, double> wm_contraction_probe(const MobilityModel& model,
                                               const GridDensity& mu0,
                                               const GridDensity& nu0, double t,
                                               const SolverOptions& opts = {},
                                               const ActionConfig& cfg = {});

/// Space-time L2 discrepancy between a piecewise-constant JKO trajectory and
/// a finite-difference trajectory on the same grid; `relative` divides by the
/// space-time norm of mu_fd - zbar.
struct CompareResult {
  double discrepancy = 0.0;
  double reference_norm = 0.0;
  double relative = 0.0;
};
CompareResult compare_jko_fd(const JkoTrajectory& jko, const FdTrajectory& fd,
                             const Vector& zbar);

}  // namespace mmt
