#pragma once

#include <vector>

#include "mmt/transport.hpp"

namespace mmt {

/// Driving energy integrand f on S. Three carriers: a quadratic form
/// (optionally perturbed by a smooth expression), a free-form expression,
/// or the mobility model's own inducing potential h.
class EnergyFunction {
 public:
  enum class Kind { Quadratic, Expression, ModelPotential };

  static EnergyFunction quadratic(Matrix Q, double eps = 0.0, Expr r = {});
  static EnergyFunction expression(const Expr& f, int dimension);
  static EnergyFunction model_potential();

  Kind kind() const { return kind_; }
  double value(const MobilityModel& model, const Vector& z) const;
  Vector grad(const MobilityModel& model, const Vector& z) const;
  Matrix hessian(const MobilityModel& model, const Vector& z) const;

  /// Sampled maximal Hessian eigenvalue over S (exact for pure quadratics).
  double hessian_upper_bound(const MobilityModel& model, int samples = 512) const;

  const Matrix& Q() const { return Q_; }

 private:
  Kind kind_ = Kind::Quadratic;
  Matrix Q_;
  double eps_ = 0.0;
  Expr r_;
  std::vector<Expr> r_grad_, r_hess_;
  Expr f_;
  std::vector<Expr> f_grad_, f_hess_;
  int dim_ = 0;
};

/// Energy specification for the minimizing-movement scheme: uniformly
/// convex f (declared constant C_f, verified by sampling), compactly
/// supported spatial potential eta, reference state zbar and regime case.
struct EnergySpec {
  EnergyFunction f;
  double C_f = 1.0;
  std::vector<Expr> eta;  // one expression in x per component; empty = 0
  double eta_support_lo = 0.0, eta_support_hi = 0.0;
  Vector zbar;
  RefCase ref_case = RefCase::B;
  Vector mass_target;  // case A: per-component mass of mu - zbar

  Vector eval_eta(double x) const;
  bool has_eta() const { return !eta.empty(); }

  /// Checks C_f against sampled Hessians of f and eta against its declared
  /// support; throws InputError on violation.
  void validate(const MobilityModel& model, int samples = 512) const;
};

/// E(mu) = dx * sum_i [ f(mu_i) - f(zbar) - (mu_i - zbar)' grad f(zbar)
///                      + mu_i' eta(x_i) ]
double energy_E(const MobilityModel& model, const EnergySpec& spec, const GridDensity& mu);

/// H(mu) = dx * sum_i h_ref(mu_i)
double entropy_H(const MobilityModel& model, const EnergySpec& spec, const GridDensity& mu);

/// Rigorous lower bound for inf E over all grid densities: cellwise
/// minimization of the integrand over S (mass constraint ignored, which
/// only lowers the bound).
double inf_energy_lower_bound(const MobilityModel& model, const EnergySpec& spec,
                              const Grid1D& grid);

struct JkoOptions {
  int inner_steps = 4;  // N_t
  SolverOptions solver;
  ActionConfig action;
};

struct JkoStepRecord {
  int iterations = 0;
  bool converged = false;
  double gap = 0.0;
  double step_distance = 0.0;
  double residual = 0.0;
  double projection_magnitude = 0.0;  // terminal-slice cleanup onto S
  double mass_defect = 0.0;
  bool mollified = false;
};

struct JkoStepResult {
  GridDensity state;
  JkoStepRecord record;
  TransportPath path;
};

/// One minimizing-movement step: minimizes path_energy/(2 tau) + E(terminal)
/// over curves with fixed start and free terminal slice.
JkoStepResult jko_step(const MobilityModel& model, const EnergySpec& spec,
                       const GridDensity& mu_prev, double tau, const JkoOptions& opts);

struct JkoTrajectory {
  double tau = 0.0;
  Grid1D grid;
  std::vector<GridDensity> iterates;     // k = 0..K
  std::vector<double> step_distances;    // k = 1..K
  std::vector<double> energies;          // k = 0..K
  std::vector<double> heat_entropies;    // k = 0..K
  std::vector<double> second_moments;    // k = 0..K
  Matrix masses;                         // (K+1) x n, per-component mass of mu - zbar
  double inf_energy_estimate = 0.0;
  std::vector<JkoStepRecord> records;    // k = 1..K

  int steps() const { return static_cast<int>(step_distances.size()); }
};

/// Runs the scheme until k*tau >= t_final, recording per-step diagnostics.
/// Interpretation in time is piecewise constant on ((k-1) tau, k tau].
JkoTrajectory jko_run(const MobilityModel& model, const EnergySpec& spec,
                      const GridDensity& mu0, double tau, double t_final,
                      const JkoOptions& opts);

/// Forward-difference Dirichlet energy dx * sum |(v_{i+1}-v_i)/dx|^2.
double grad_norm2(const Matrix& values, double dx);

}  // namespace mmt
