#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmt/pde.hpp"

namespace mmt {

/// One named inequality check over recorded data: pass iff lhs <= rhs + slack.
/// Slack formulas are spelled out in `refs`; nothing is hidden.
struct DiagnosticVerdict {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool pass = false;
  bool inconclusive = false;  // missing inputs for this check
  std::string refs;
};

struct SmoothingProbe {
  double delta = 0.0;
  double distance2 = 0.0;     // d(mu0, G_delta * mu0)^2
  double entropy_drop = 0.0;  // dx * sum [h(mu0) - h(G_delta * mu0)]
};

struct ContractionProbe {
  double before = 0.0;
  double after = 0.0;
};

struct DecoupledSumProbe {
  double coupled_sq = 0.0;
  std::vector<double> component_sq;
};

struct DiagnosticBundle {
  const MobilityModel* model = nullptr;
  const EnergySpec* spec = nullptr;
  const JkoTrajectory* jko = nullptr;
  const FdTrajectory* fd = nullptr;
  const GeodesicResult* geodesic = nullptr;
  std::vector<SmoothingProbe> smoothing;
  std::optional<ContractionProbe> contraction;
  std::optional<DecoupledSumProbe> decoupled;
  double solver_tol = 2e-3;
  uint64_t seed = 1;
};

/// Names: energy_monotone, telescoping_distance, holder_bound,
/// addreg_dissipation, introapriori_dissipation, moment_bound,
/// smooth_approx_bound, entropy_sandwich, weak_form_residual,
/// contraction_probe, constant_speed, decoupled_sum_identity.
/// Missing inputs make the corresponding verdict inconclusive.
std::vector<DiagnosticVerdict> run_diagnostics(const DiagnosticBundle& bundle,
                                               const std::vector<std::string>& selection);

std::vector<std::string> all_diagnostic_names();

/// Residual of the continuous weak form with bump test functions, evaluated
/// on a piecewise-constant JKO trajectory or an FD trajectory.
double weak_form_residual_jko(const MobilityModel& model, const EnergySpec& spec,
                              const JkoTrajectory& traj);
double weak_form_residual_fd(const MobilityModel& model, const EnergySpec& spec,
                             const FdTrajectory& traj);

/// Both sides of the discrete two-sided weak-form inequality for JKO output
/// (alpha = sqrt(tau), lambda from the sampled potential-convexity estimate).
struct DweakSides {
  double lhs = 0.0;
  double rhs = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
};
DweakSides dweak_sides_jko(const MobilityModel& model, const EnergySpec& spec,
                           const JkoTrajectory& traj);

}  // namespace mmt
