#include "mmt/jko.hpp"

#include <cmath>

#include "mmt/errors.hpp"
#include "staggered_solver.hpp"

namespace mmt {

// ---------------------------------------------------------- EnergyFunction

EnergyFunction EnergyFunction::quadratic(Matrix Q, double eps, Expr r) {
  if (Q.rows() != Q.cols() || Q.rows() < 1)
    throw InputError("energy: Q must be square");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + Q.cwiseAbs().maxCoeff()))
    throw InputError("energy: Q must be symmetric");
  EnergyFunction f;
  f.kind_ = Kind::Quadratic;
  f.Q_ = std::move(Q);
  f.dim_ = static_cast<int>(f.Q_.rows());
  f.eps_ = eps;
  if (eps != 0.0) {
    if (!r.valid()) throw InputError("energy: perturbation eps set without r");
    f.r_ = r;
    for (int j = 0; j < f.dim_; ++j)
      f.r_grad_.push_back(r.derivative("z" + std::to_string(j + 1)));
    for (int i = 0; i < f.dim_; ++i)
      for (int j = i; j < f.dim_; ++j)
        f.r_hess_.push_back(f.r_grad_[i].derivative("z" + std::to_string(j + 1)));
  }
  return f;
}

EnergyFunction EnergyFunction::expression(const Expr& fx, int dimension) {
  if (fx.max_z_index() > dimension || fx.uses_x())
    throw InputError("energy: f must use z1..zn only");
  EnergyFunction f;
  f.kind_ = Kind::Expression;
  f.dim_ = dimension;
  f.f_ = fx;
  for (int j = 0; j < dimension; ++j)
    f.f_grad_.push_back(fx.derivative("z" + std::to_string(j + 1)));
  for (int i = 0; i < dimension; ++i)
    for (int j = i; j < dimension; ++j)
      f.f_hess_.push_back(f.f_grad_[i].derivative("z" + std::to_string(j + 1)));
  return f;
}

EnergyFunction EnergyFunction::model_potential() {
  EnergyFunction f;
  f.kind_ = Kind::ModelPotential;
  return f;
}

double EnergyFunction::value(const MobilityModel& model, const Vector& z) const {
  switch (kind_) {
    case Kind::Quadratic: {
      double v = 0.5 * z.dot(Q_ * z);
      if (eps_ != 0.0) v += eps_ * r_.eval_z(z.data(), static_cast<int>(z.size()));
      return v;
    }
    case Kind::Expression:
      return f_.eval_z(z.data(), static_cast<int>(z.size()));
    case Kind::ModelPotential:
      return model.h(z);
  }
  throw Error("energy value: unreachable");
}

Vector EnergyFunction::grad(const MobilityModel& model, const Vector& z) const {
  const int n = static_cast<int>(z.size());
  switch (kind_) {
    case Kind::Quadratic: {
      Vector g = Q_ * z;
      if (eps_ != 0.0)
        for (int j = 0; j < n; ++j) g[j] += eps_ * r_grad_[j].eval_z(z.data(), n);
      return g;
    }
    case Kind::Expression: {
      Vector g(n);
      for (int j = 0; j < n; ++j) g[j] = f_grad_[j].eval_z(z.data(), n);
      return g;
    }
    case Kind::ModelPotential:
      return model.grad_h(z);
  }
  throw Error("energy grad: unreachable");
}

Matrix EnergyFunction::hessian(const MobilityModel& model, const Vector& z) const {
  const int n = static_cast<int>(z.size());
  switch (kind_) {
    case Kind::Quadratic: {
      Matrix H = Q_;
      if (eps_ != 0.0) {
        int k = 0;
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            const double v = eps_ * r_hess_[k++].eval_z(z.data(), n);
            H(i, j) += v;
            if (i != j) H(j, i) += v;
          }
      }
      return H;
    }
    case Kind::Expression: {
      Matrix H(n, n);
      int k = 0;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          H(i, j) = H(j, i) = f_hess_[k++].eval_z(z.data(), n);
        }
      return H;
    }
    case Kind::ModelPotential:
      return model.M_inverse(z);
  }
  throw Error("energy hessian: unreachable");
}

double EnergyFunction::hessian_upper_bound(const MobilityModel& model, int samples) const {
  if (kind_ == Kind::Quadratic && eps_ == 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(Q_);
    return es.eigenvalues().maxCoeff();
  }
  // sampled bound with headroom
  const StateSpace& S = model.space();
  Vector lo, hi;
  S.bounding_box(lo, hi);
  const int n = S.dim();
  uint64_t state = 88172645463325252ull;
  auto rnd = [&]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return static_cast<double>(state % 1000003) / 1000003.0;
  };
  double best = 0.0;
  int found = 0;
  while (found < samples) {
    Vector z(n);
    for (int j = 0; j < n; ++j) z[j] = lo[j] + (hi[j] - lo[j]) * rnd();
    if (S.interior_distance(z) < 1e-6) continue;
    ++found;
    Eigen::SelfAdjointEigenSolver<Matrix> es(hessian(model, z));
    best = std::max(best, es.eigenvalues().maxCoeff());
  }
  return 1.05 * best;
}

// -------------------------------------------------------------- EnergySpec

Vector EnergySpec::eval_eta(double x) const {
  const int n = static_cast<int>(zbar.size());
  Vector v = Vector::Zero(n);
  if (!eta.empty()) {
    if (static_cast<int>(eta.size()) != n)
      throw InputError("energy: eta component count mismatch");
    for (int j = 0; j < n; ++j) v[j] = eta[j].eval_x(x);
  }
  return v;
}

void EnergySpec::validate(const MobilityModel& model, int samples) const {
  const StateSpace& S = model.space();
  if (zbar.size() != S.dim()) throw InputError("energy: zbar dimension mismatch");
  if (!S.contains(zbar)) throw InputError("energy: zbar outside the state space");
  if (ref_case == RefCase::B && S.interior_distance(zbar) <= 0.0)
    throw InputError("energy: case B requires an interior reference state");
  if (C_f <= 0.0) throw InputError("energy: C_f must be positive");
  // sampled check of the declared uniform convexity constant (F)
  Vector lo, hi;
  S.bounding_box(lo, hi);
  const int n = S.dim();
  uint64_t state = 0x2545F4914F6CDD1Dull;
  auto rnd = [&]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return static_cast<double>(state % 1000003) / 1000003.0;
  };
  int found = 0;
  while (found < samples) {
    Vector z(n);
    for (int j = 0; j < n; ++j) z[j] = lo[j] + (hi[j] - lo[j]) * rnd();
    if (S.interior_distance(z) < 1e-9) continue;
    ++found;
    Eigen::SelfAdjointEigenSolver<Matrix> es(f.hessian(model, z));
    if (es.eigenvalues().minCoeff() < C_f - 1e-9 * (1.0 + std::abs(C_f)))
      throw InputError("energy: sampled Hessian of f violates the declared C_f");
  }
  // eta must vanish outside its declared support
  if (!eta.empty() && eta_support_hi > eta_support_lo) {
    for (int j = 0; j < n; ++j) {
      for (int s = 0; s < 64; ++s) {
        const double span = eta_support_hi - eta_support_lo;
        const double left = eta_support_lo - (1.0 + s) * span / 16.0;
        const double right = eta_support_hi + (1.0 + s) * span / 16.0;
        if (std::abs(eta[j].eval_x(left)) > 1e-12 ||
            std::abs(eta[j].eval_x(right)) > 1e-12)
          throw InputError("energy: eta does not vanish outside its declared support");
      }
    }
  }
}

namespace {

double integrand(const MobilityModel& model, const EnergySpec& spec, const Vector& z,
                 const Vector& eta_i, const Vector& gf_bar, double f_bar) {
  return spec.f.value(model, z) - f_bar - (z - spec.zbar).dot(gf_bar) + z.dot(eta_i);
}

}  // namespace

double energy_E(const MobilityModel& model, const EnergySpec& spec, const GridDensity& mu) {
  const int N = mu.cells();
  const int n = mu.components();
  if (n != model.dim()) throw InputError("energy_E: component mismatch");
  if (spec.ref_case == RefCase::A && spec.mass_target.size() == n) {
    for (int j = 0; j < n; ++j) {
      const double m = mu.mass(j, spec.zbar[j]);
      if (std::abs(m - spec.mass_target[j]) >
          1e-8 * (1.0 + std::abs(spec.mass_target[j])))
        throw InputError("energy_E: case A mass constraint violated");
    }
  }
  const double f_bar = spec.f.value(model, spec.zbar);
  const Vector gf_bar = spec.f.grad(model, spec.zbar);
  double acc = 0.0;
  for (int i = 0; i < N; ++i)
    acc += integrand(model, spec, mu.values.row(i).transpose(),
                     spec.eval_eta(mu.grid.cell_x(i)), gf_bar, f_bar);
  return acc * mu.grid.dx();
}

double entropy_H(const MobilityModel& model, const EnergySpec& spec, const GridDensity& mu) {
  double acc = 0.0;
  for (int i = 0; i < mu.cells(); ++i)
    acc += model.h_ref(mu.values.row(i).transpose(), spec.zbar, spec.ref_case);
  return acc * mu.grid.dx();
}

double inf_energy_lower_bound(const MobilityModel& model, const EnergySpec& spec,
                              const Grid1D& grid) {
  const StateSpace& S = model.space();
  const int n = S.dim();
  const double f_bar = spec.f.value(model, spec.zbar);
  const Vector gf_bar = spec.f.grad(model, spec.zbar);
  double acc = 0.0;
  for (int i = 0; i < grid.cells; ++i) {
    const Vector eta_i = spec.eval_eta(grid.cell_x(i));
    // projected Newton for the cellwise minimum over S
    Vector z = S.project(spec.zbar);
    for (int it = 0; it < 60; ++it) {
      Vector g = spec.f.grad(model, z) - gf_bar + eta_i;
      if ((z - S.project(z - g)).norm() <= 1e-12 * (1.0 + z.norm())) break;
      Matrix H = spec.f.hessian(model, z);
      Vector dir = H.ldlt().solve(-g);
      const double base = integrand(model, spec, z, eta_i, gf_bar, f_bar);
      double t = 1.0;
      bool ok = false;
      for (int ls = 0; ls < 40; ++ls) {
        Vector trial = S.project(z + t * dir);
        if (integrand(model, spec, trial, eta_i, gf_bar, f_bar) <= base) {
          z = trial;
          ok = true;
          break;
        }
        t *= 0.5;
      }
      if (!ok) break;
    }
    acc += integrand(model, spec, z, eta_i, gf_bar, f_bar);
  }
  return acc * grid.dx();
}

double grad_norm2(const Matrix& values, double dx) {
  double acc = 0.0;
  for (int i = 0; i + 1 < values.rows(); ++i)
    acc += (values.row(i + 1) - values.row(i)).squaredNorm();
  return acc / dx;
}

// ----------------------------------------------------------------- stepper

JkoStepResult jko_step(const MobilityModel& model, const EnergySpec& spec,
                       const GridDensity& mu_prev, double tau, const JkoOptions& opts) {
  if (tau <= 0.0) throw InputError("jko_step: tau must be positive");
  mu_prev.validate(model.space());
  const int N = mu_prev.cells();
  const int n = mu_prev.components();
  const double dx = mu_prev.grid.dx();

  Matrix eta_cells = Matrix::Zero(N, n);
  for (int i = 0; i < N; ++i)
    eta_cells.row(i) = spec.eval_eta(mu_prev.grid.cell_x(i)).transpose();
  const double f_bar = spec.f.value(model, spec.zbar);
  const Vector gf_bar = spec.f.grad(model, spec.zbar);

  detail::EndpointObjective ep;
  ep.weight = dx;
  ep.space = &model.space();
  ep.value = [&](int cell, const Vector& z) {
    return spec.f.value(model, z) - f_bar - (z - spec.zbar).dot(gf_bar) +
           z.dot(eta_cells.row(cell).transpose());
  };
  ep.derivatives = [&](int cell, const Vector& z, Vector& g, Matrix& H) {
    g = spec.f.grad(model, z) - gf_bar + eta_cells.row(cell).transpose();
    H = spec.f.hessian(model, z);
  };

  detail::StaggeredProblem prob;
  prob.model = &model;
  prob.grid = mu_prev.grid;
  prob.steps = opts.inner_steps;
  prob.phi_weight = 1.0 / (2.0 * tau);
  prob.mu_start = mu_prev.values;
  prob.endpoint = &ep;
  prob.action = opts.action;

  JkoStepResult result;
  detail::PdhgStats stats = detail::pdhg_solve(prob, opts.solver, result.path);

  // terminal-slice cleanup: back onto S with per-component mass restored
  Matrix terminal = result.path.densities.back();
  Vector target_mass(n);
  for (int j = 0; j < n; ++j) target_mass[j] = dx * terminal.col(j).sum();
  Matrix clean = terminal;
  double proj_mag = 0.0;
  for (int pass = 0; pass < 3; ++pass) {
    for (int i = 0; i < N; ++i) {
      Vector row = clean.row(i).transpose();
      Vector p = model.space().project(row);
      proj_mag = std::max(proj_mag, (p - row).cwiseAbs().maxCoeff());
      clean.row(i) = p.transpose();
    }
    for (int j = 0; j < n; ++j) {
      const double defect = target_mass[j] - dx * clean.col(j).sum();
      clean.col(j).array() += defect / (N * dx);
    }
  }
  double mass_defect = 0.0;
  for (int j = 0; j < n; ++j)
    mass_defect = std::max(mass_defect, std::abs(target_mass[j] - dx * clean.col(j).sum()));

  result.state = GridDensity{mu_prev.grid, clean};
  result.record.iterations = stats.iterations;
  result.record.converged = stats.converged;
  result.record.gap = stats.gap;
  result.record.step_distance =
      std::isfinite(stats.path_energy) ? std::sqrt(std::max(0.0, stats.path_energy)) : 0.0;
  result.record.residual = stats.residual;
  result.record.projection_magnitude = proj_mag;
  result.record.mass_defect = mass_defect;
  result.record.mollified = stats.mollified;
  return result;
}

JkoTrajectory jko_run(const MobilityModel& model, const EnergySpec& spec,
                      const GridDensity& mu0, double tau, double t_final,
                      const JkoOptions& opts) {
  mu0.validate(model.space());
  JkoTrajectory traj;
  traj.tau = tau;
  traj.grid = mu0.grid;
  traj.inf_energy_estimate = inf_energy_lower_bound(model, spec, mu0.grid);

  const int n = mu0.components();
  const int K = static_cast<int>(std::ceil(t_final / tau - 1e-12));
  traj.masses.resize(K + 1, n);

  auto push_state = [&](const GridDensity& mu) {
    const int k = static_cast<int>(traj.iterates.size());
    traj.iterates.push_back(mu);
    traj.energies.push_back(energy_E(model, spec, mu));
    traj.heat_entropies.push_back(entropy_H(model, spec, mu));
    traj.second_moments.push_back(second_moment(mu, spec.zbar));
    for (int j = 0; j < n; ++j) traj.masses(k, j) = mu.mass(j, spec.zbar[j]);
  };
  push_state(mu0);

  GridDensity current = mu0;
  for (int k = 1; k <= K; ++k) {
    JkoStepResult step = jko_step(model, spec, current, tau, opts);
    traj.records.push_back(step.record);
    traj.step_distances.push_back(step.record.step_distance);
    current = step.state;
    push_state(current);
    if (!step.record.converged) break;  // flagged record, trajectory halts
  }
  return traj;
}

}  // namespace mmt
