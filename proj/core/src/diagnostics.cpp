#include "mmt/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmt/conditions.hpp"
#include "mmt/errors.hpp"

namespace mmt {

namespace {

// C_c^infinity bump b(x) = exp(-1/(1-x^2)) on (-1,1) with closed-form
// derivatives; test functions for the weak formulations.
struct Bump {
  double center, width, amp;

  double arg(double x) const { return (x - center) / width; }
  double value(double x) const {
    const double u = arg(x);
    if (std::abs(u) >= 1.0) return 0.0;
    return amp * std::exp(-1.0 / (1.0 - u * u));
  }
  double d1(double x) const {
    const double u = arg(x);
    if (std::abs(u) >= 1.0) return 0.0;
    const double s = 1.0 - u * u;
    return value(x) * (-2.0 * u / (s * s)) / width;
  }
  double d2(double x) const {
    const double u = arg(x);
    if (std::abs(u) >= 1.0) return 0.0;
    const double s = 1.0 - u * u;
    const double up = -2.0 * u / (s * s);  // derivative of -1/s wrt u
    const double upp = (-2.0 * s * s - (-2.0 * u) * 2.0 * s * (-2.0 * u)) / (s * s * s * s);
    return value(x) * (upp + up * up) / (width * width);
  }
};

std::vector<Bump> spatial_test_functions(const Grid1D& grid, int n) {
  std::vector<Bump> rho;
  const double c = 0.5 * (grid.x_min + grid.x_max);
  const double w = 0.4 * (grid.x_max - grid.x_min);
  for (int j = 0; j < n; ++j)
    rho.push_back(Bump{c, w, 1.0 / (1.0 + j)});
  return rho;
}

double c2_norm_of(const std::vector<Bump>& rho, const Grid1D& grid) {
  double best = 0.0;
  for (int i = 0; i <= 512; ++i) {
    const double x = grid.x_min + (grid.x_max - grid.x_min) * i / 512.0;
    for (const auto& b : rho)
      best = std::max({best, std::abs(b.value(x)), std::abs(b.d1(x)), std::abs(b.d2(x))});
  }
  return best;
}

// dx * sum_i rho(x_i)' mu_i
double mass_pairing(const std::vector<Bump>& rho, const Grid1D& grid, const Matrix& mu) {
  double acc = 0.0;
  for (int i = 0; i < grid.cells; ++i) {
    const double x = grid.cell_x(i);
    for (int j = 0; j < mu.cols(); ++j) acc += rho[j].value(x) * mu(i, j);
  }
  return acc * grid.dx();
}

// dx * sum_faces rho'(x_f)' [ M hess f dmu + M deta ], forward differences
double flux_pairing(const MobilityModel& model, const EnergySpec& spec,
                    const std::vector<Bump>& rho, const Grid1D& grid, const Matrix& mu) {
  const int N = grid.cells;
  const int n = static_cast<int>(mu.cols());
  const double dx = grid.dx();
  double acc = 0.0;
  for (int i = 0; i + 1 < N; ++i) {
    const double xf = grid.face_x(i + 1);
    Vector drho(n);
    for (int j = 0; j < n; ++j) drho[j] = rho[j].d1(xf);
    Vector mid = 0.5 * (mu.row(i) + mu.row(i + 1)).transpose();
    mid = model.space().project(mid);
    const Vector dmu = (mu.row(i + 1) - mu.row(i)).transpose() / dx;
    const Vector deta =
        (spec.eval_eta(grid.cell_x(i + 1)) - spec.eval_eta(grid.cell_x(i))) / dx;
    const Matrix M = model.M(mid);
    acc += drho.dot(M * (spec.f.hessian(model, mid) * dmu) + M * deta);
  }
  return acc * dx;
}

// dx * sum_faces [ dmu' hess f dmu + deta' dmu ]
double dissipation_pairing(const MobilityModel& model, const EnergySpec& spec,
                           const Grid1D& grid, const Matrix& mu) {
  const int N = grid.cells;
  const double dx = grid.dx();
  double acc = 0.0;
  for (int i = 0; i + 1 < N; ++i) {
    Vector mid = 0.5 * (mu.row(i) + mu.row(i + 1)).transpose();
    mid = model.space().project(mid);
    const Vector dmu = (mu.row(i + 1) - mu.row(i)).transpose() / dx;
    const Vector deta =
        (spec.eval_eta(grid.cell_x(i + 1)) - spec.eval_eta(grid.cell_x(i))) / dx;
    acc += dmu.dot(spec.f.hessian(model, mid) * dmu) + deta.dot(dmu);
  }
  return acc * dx;
}

struct XorShift {
  uint64_t s;
  explicit XorShift(uint64_t seed) : s(seed ? seed : 1) {}
  uint64_t next() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  }
};

DiagnosticVerdict missing(const std::string& name, const std::string& what) {
  DiagnosticVerdict v;
  v.name = name;
  v.inconclusive = true;
  v.pass = false;
  v.refs = "inconclusive: missing " + what;
  return v;
}

}  // namespace

double weak_form_residual_jko(const MobilityModel& model, const EnergySpec& spec,
                              const JkoTrajectory& traj) {
  const int K = traj.steps();
  if (K < 1) throw InputError("weak form: empty trajectory");
  const double tau = traj.tau;
  const double T = K * tau;
  const auto rho = spatial_test_functions(traj.grid, traj.iterates[0].components());
  const Bump psi{0.5 * T, 0.45 * T, 1.0};
  // piecewise-constant in time: mu(t) = mu^k on ((k-1)tau, k tau]
  double acc = 0.0;
  for (int k = 1; k <= K; ++k) {
    const Matrix& mu = traj.iterates[k].values;
    const double t0 = (k - 1) * tau, t1 = k * tau;
    // time integral of -psi' over the interval is exact
    acc += -(psi.value(t1) - psi.value(t0)) * mass_pairing(rho, traj.grid, mu);
    // Simpson for the psi-weighted flux term
    const double B = flux_pairing(model, spec, rho, traj.grid, mu);
    const double w =
        (tau / 6.0) * (psi.value(t0) + 4.0 * psi.value(0.5 * (t0 + t1)) + psi.value(t1));
    acc += w * B;
  }
  return std::abs(acc);
}

double weak_form_residual_fd(const MobilityModel& model, const EnergySpec& spec,
                             const FdTrajectory& traj) {
  const int R = traj.records();
  if (R < 2) throw InputError("weak form: trajectory too short");
  const double T = traj.times.back();
  const auto rho = spatial_test_functions(traj.grid, static_cast<int>(traj.states[0].cols()));
  const Bump psi{0.5 * T, 0.45 * T, 1.0};
  double acc = 0.0;
  for (int m = 0; m + 1 < R; ++m) {
    const double t0 = traj.times[m], t1 = traj.times[m + 1];
    const double wdt = t1 - t0;
    for (int side = 0; side < 2; ++side) {
      const double t = side == 0 ? t0 : t1;
      const Matrix& mu = traj.states[side == 0 ? m : m + 1];
      const double term = -psi.d1(t) * mass_pairing(rho, traj.grid, mu) +
                          psi.value(t) * flux_pairing(model, spec, rho, traj.grid, mu);
      acc += 0.5 * wdt * term;
    }
  }
  return std::abs(acc);
}

DweakSides dweak_sides_jko(const MobilityModel& model, const EnergySpec& spec,
                           const JkoTrajectory& traj) {
  const int K = traj.steps();
  if (K < 1) throw InputError("dweak: empty trajectory");
  const double tau = traj.tau;
  const double T = K * tau;
  const int n = traj.iterates[0].components();
  const auto rho = spatial_test_functions(traj.grid, n);
  const Bump psi{0.5 * T, 0.45 * T, 1.0};

  DweakSides out;
  out.alpha = std::sqrt(tau);
  const double R = c2_norm_of(rho, traj.grid);
  SamplePlan plan;
  plan.points = 256;
  plan.directions = 16;
  plan.margin = 1e-3;
  out.lambda = estimate_lambda(model, out.alpha, R, plan);

  double lhs = 0.0, rhs = 0.0;
  for (int k = 1; k <= K; ++k) {
    const Matrix& mu = traj.iterates[k].values;
    const double pk0 = psi.value((k - 1) * tau);
    const double pk1 = psi.value(k * tau);
    lhs += mass_pairing(rho, traj.grid, mu) * (pk0 - pk1);
    lhs += tau * pk0 * flux_pairing(model, spec, rho, traj.grid, mu);
    // |psi| = psi here (nonnegative bump)
    rhs += traj.heat_entropies[k] * (pk0 - pk1);
    rhs += tau * pk0 * dissipation_pairing(model, spec, traj.grid, mu);
  }
  rhs = out.alpha * rhs +
        2.0 * out.lambda * tau * 1.0 *
            std::exp(-1.0) *  // |psi|_{C0} = max of the bump = e^{-1}
            (traj.energies.front() - traj.inf_energy_estimate);
  out.lhs = std::abs(lhs);
  out.rhs = std::abs(rhs);
  return out;
}

std::vector<std::string> all_diagnostic_names() {
  return {"energy_monotone",         "telescoping_distance", "holder_bound",
          "addreg_dissipation",      "introapriori_dissipation",
          "moment_bound",            "smooth_approx_bound",  "entropy_sandwich",
          "weak_form_residual",      "contraction_probe",    "constant_speed",
          "decoupled_sum_identity"};
}

std::vector<DiagnosticVerdict> run_diagnostics(const DiagnosticBundle& bundle,
                                               const std::vector<std::string>& selection) {
  std::vector<DiagnosticVerdict> out;
  const double tol = bundle.solver_tol;

  for (const std::string& name : selection) {
    DiagnosticVerdict v;
    v.name = name;

    if (name == "energy_monotone") {
      if (!bundle.jko) {
        out.push_back(missing(name, "jko trajectory"));
        continue;
      }
      const auto& E = bundle.jko->energies;
      double worst = -std::numeric_limits<double>::infinity();
      for (size_t k = 1; k < E.size(); ++k) worst = std::max(worst, E[k] - E[k - 1]);
      v.lhs = worst;
      v.rhs = 0.0;
      v.slack = tol * (1.0 + std::abs(E.front()));
      v.refs = "max_k E(mu_k)-E(mu_{k-1}) <= 0; slack = solver_tol*(1+|E0|)";
    } else if (name == "telescoping_distance") {
      if (!bundle.jko) {
        out.push_back(missing(name, "jko trajectory"));
        continue;
      }
      double sum = 0.0;
      for (double d : bundle.jko->step_distances) sum += d * d;
      v.lhs = sum;
      v.rhs = 2.0 * bundle.jko->tau *
              (bundle.jko->energies.front() - bundle.jko->inf_energy_estimate);
      v.slack = 3.0 * tol * bundle.jko->steps();
      v.refs = "sum_k d_k^2 <= 2 tau (E0 - infE); slack = 3*solver_tol*K";
    } else if (name == "holder_bound") {
      if (!bundle.jko) {
        out.push_back(missing(name, "jko trajectory"));
        continue;
      }
      const auto& d = bundle.jko->step_distances;
      const int K = static_cast<int>(d.size());
      if (K < 1) {
        out.push_back(missing(name, "steps"));
        continue;
      }
      const double budget = 2.0 * (bundle.jko->energies.front() -
                                   bundle.jko->inf_energy_estimate);
      XorShift rng(bundle.seed ^ 0x51ed2701ull);
      double worst = -std::numeric_limits<double>::infinity();
      for (int trial = 0; trial < 32; ++trial) {
        int i = static_cast<int>(rng.next() % (K + 1));
        int j = static_cast<int>(rng.next() % (K + 1));
        if (i == j) continue;
        if (i > j) std::swap(i, j);
        double part = 0.0;
        for (int k = i + 1; k <= j; ++k) part += d[k - 1] * d[k - 1];
        const double chain = std::sqrt(static_cast<double>(j - i) * part);
        const double bound =
            std::sqrt(budget * std::max(bundle.jko->tau, (j - i) * bundle.jko->tau));
        worst = std::max(worst, chain - bound);
      }
      v.lhs = worst;
      v.rhs = 0.0;
      v.slack = tol;
      v.refs =
          "chained Cauchy-Schwarz distance bound <= sqrt(2(E0-infE) max(tau,|t-s|)); "
          "32 sampled index pairs";
    } else if (name == "addreg_dissipation") {
      if (!bundle.jko || !bundle.spec || !bundle.model) {
        out.push_back(missing(name, "jko trajectory, spec, model"));
        continue;
      }
      const auto& traj = *bundle.jko;
      const double dx = traj.grid.dx();
      Matrix eta_cells = Matrix::Zero(traj.grid.cells, traj.iterates[0].components());
      for (int i = 0; i < traj.grid.cells; ++i)
        eta_cells.row(i) = bundle.spec->eval_eta(traj.grid.cell_x(i)).transpose();
      const double C = grad_norm2(eta_cells, dx) / (2.0 * bundle.spec->C_f);
      double worst = -std::numeric_limits<double>::infinity();
      double scale = 0.0;
      for (int k = 1; k <= traj.steps(); ++k) {
        const double lhs_k = traj.tau * grad_norm2(traj.iterates[k].values, dx);
        const double rhs_k = (2.0 / bundle.spec->C_f) *
                                 (traj.heat_entropies[k - 1] - traj.heat_entropies[k]) +
                             C * traj.tau;
        worst = std::max(worst, lhs_k - rhs_k);
        scale = std::max(scale, std::abs(rhs_k));
      }
      v.lhs = worst;
      v.rhs = 0.0;
      v.slack = tol * (1.0 + scale);
      v.refs =
          "tau |dmu_k|^2 <= (2/C_f)(H_{k-1} - H_k) + C tau, C = |deta|^2/(2 C_f); "
          "slack = solver_tol*(1+scale)";
    } else if (name == "introapriori_dissipation") {
      if (!bundle.fd) {
        out.push_back(missing(name, "fd trajectory"));
        continue;
      }
      const auto& traj = *bundle.fd;
      double worst = -std::numeric_limits<double>::infinity();
      double scale = 0.0;
      for (int m = 0; m + 1 < traj.records(); ++m) {
        const double drop = traj.heat_entropies[m] - traj.heat_entropies[m + 1];
        const double budget = traj.dissipation_budget[m + 1];
        worst = std::max(worst, budget - drop);
        scale = std::max(scale, std::abs(budget));
      }
      v.lhs = worst;
      v.rhs = 0.0;
      v.slack = 0.02 * (1.0 + scale);
      v.refs =
          "accumulated dt(C_f|dmu|^2 + <deta,dmu>) <= H drop per record window; "
          "slack = 0.02*(1+scale), first-order time-stepping remainder";
    } else if (name == "moment_bound") {
      if (!bundle.jko || !bundle.model || !bundle.spec) {
        out.push_back(missing(name, "jko trajectory, model, spec"));
        continue;
      }
      if (!bundle.model->diagonal()) {
        out.push_back(missing(name, "fully decoupled model (Lipschitz constant)"));
        continue;
      }
      double L = 0.0;
      for (const auto& m : bundle.model->scalar_mobilities())
        L = std::max(L, m.dm(m.lo()));
      const auto& traj = *bundle.jko;
      double worst = -std::numeric_limits<double>::infinity();
      double scale = 0.0;
      for (int k = 1; k <= traj.steps(); ++k) {
        const double lhs_k = traj.second_moments[k];
        const double rhs_k = std::exp(L) * (traj.second_moments[k - 1] +
                                            traj.step_distances[k - 1] *
                                                traj.step_distances[k - 1]);
        worst = std::max(worst, lhs_k - rhs_k);
        scale = std::max(scale, std::abs(rhs_k));
      }
      v.lhs = worst;
      v.rhs = 0.0;
      v.slack = tol * (1.0 + scale);
      v.refs = "l2(mu_k - zbar) <= e^L (l2(mu_{k-1} - zbar) + d_k^2), L = max_j m_j'(lo)";
    } else if (name == "smooth_approx_bound") {
      if (bundle.smoothing.empty()) {
        out.push_back(missing(name, "smoothing probes"));
        continue;
      }
      double worst = -std::numeric_limits<double>::infinity();
      for (const auto& p : bundle.smoothing)
        worst = std::max(worst, p.distance2 - p.delta * p.entropy_drop);
      v.lhs = worst;
      v.rhs = 0.0;
      v.slack = 3.0 * tol;
      v.refs = "d(mu, G_delta mu)^2 <= delta * dx sum[h(mu)-h(G_delta mu)] + 3 solver_tol";
    } else if (name == "entropy_sandwich") {
      if (!bundle.jko || !bundle.spec || !bundle.model) {
        out.push_back(missing(name, "jko trajectory, spec, model"));
        continue;
      }
      const auto& traj = *bundle.jko;
      const double dx = traj.grid.dx();
      Matrix eta_cells = Matrix::Zero(traj.grid.cells, traj.iterates[0].components());
      for (int i = 0; i < traj.grid.cells; ++i)
        eta_cells.row(i) = bundle.spec->eval_eta(traj.grid.cell_x(i)).transpose();
      const double eta2 = dx * eta_cells.squaredNorm();
      double zint = 0.0;
      for (int i = 0; i < traj.grid.cells; ++i)
        zint += bundle.spec->zbar.dot(eta_cells.row(i).transpose());
      zint *= dx;
      const double Cf = bundle.spec->C_f;
      const double Cup = bundle.spec->f.hessian_upper_bound(*bundle.model);
      double worst = -std::numeric_limits<double>::infinity();
      double scale = 0.0;
      for (size_t k = 0; k < traj.iterates.size(); ++k) {
        Matrix centered = traj.iterates[k].values;
        centered.rowwise() -= bundle.spec->zbar.transpose();
        const double X = dx * centered.squaredNorm();
        const double E = traj.energies[k];
        const double low = 0.25 * Cf * X - eta2 / Cf + zint;
        const double up = (0.5 * Cup + 0.25 * Cf) * X + eta2 / Cf + zint;
        worst = std::max({worst, low - E, E - up});
        scale = std::max({scale, std::abs(low), std::abs(up)});
      }
      v.lhs = worst;
      v.rhs = 0.0;
      v.slack = 1e-9 * (1.0 + scale);
      v.refs =
          "Cf/4 X - |eta|^2/Cf + <zbar,eta> <= E <= (Cup/2+Cf/4) X + |eta|^2/Cf + "
          "<zbar,eta>, X = |mu-zbar|_{L2}^2 (same quadrature, exact inequality)";
    } else if (name == "weak_form_residual") {
      if (bundle.jko && bundle.spec && bundle.model) {
        const DweakSides s = dweak_sides_jko(*bundle.model, *bundle.spec, *bundle.jko);
        v.lhs = s.lhs;
        v.rhs = s.rhs;
        v.slack = tol * (1.0 + s.rhs);
        std::ostringstream os;
        os << "two-sided discrete weak form, alpha=sqrt(tau)=" << s.alpha
           << ", lambda=" << s.lambda << " (sampled); slack = solver_tol*(1+rhs)";
        v.refs = os.str();
      } else if (bundle.fd && bundle.spec && bundle.model) {
        const double r = weak_form_residual_fd(*bundle.model, *bundle.spec, *bundle.fd);
        v.lhs = r;
        v.rhs = 0.0;
        v.slack = 0.05;
        v.refs = "weak-form residual of the fd trajectory; slack = 0.05 absolute";
      } else {
        out.push_back(missing(name, "trajectory, spec, model"));
        continue;
      }
    } else if (name == "contraction_probe") {
      if (!bundle.contraction) {
        out.push_back(missing(name, "contraction probe"));
        continue;
      }
      v.lhs = bundle.contraction->after;
      v.rhs = bundle.contraction->before;
      v.slack = 0.02 * bundle.contraction->before;
      v.refs = "heat flow is non-expansive: d_after <= 1.02 d_before";
    } else if (name == "constant_speed") {
      if (!bundle.geodesic) {
        out.push_back(missing(name, "geodesic"));
        continue;
      }
      const Vector& a = bundle.geodesic->per_slice_action;
      const double mean = a.mean();
      const double sd = std::sqrt((a.array() - mean).square().sum() / a.size());
      v.lhs = mean > 0 ? sd / mean : 0.0;
      v.rhs = 0.05;
      v.slack = 0.0;
      v.refs = "stdev/mean of per-slice action <= 5% on converged solves";
    } else if (name == "decoupled_sum_identity") {
      if (!bundle.decoupled) {
        out.push_back(missing(name, "decoupled probe"));
        continue;
      }
      double sum = 0.0;
      for (double c : bundle.decoupled->component_sq) sum += c;
      v.lhs = std::abs(bundle.decoupled->coupled_sq - sum);
      v.rhs = 0.0;
      v.slack = 1e-3 * std::max(bundle.decoupled->coupled_sq, 1e-30);
      v.refs = "d^2 = sum_j d_j^2 for fully decoupled mobilities, defect <= 1e-3 rel";
    } else {
      out.push_back(missing(name, "known check name"));
      continue;
    }

    v.pass = v.lhs <= v.rhs + v.slack;
    out.push_back(v);
  }
  return out;
}

}  // namespace mmt
