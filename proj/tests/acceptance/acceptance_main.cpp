// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <iostream>
#include <vector>

#include "mmt/conditions.hpp"
#include "mmt/diagnostics.hpp"
#include "mmt/initial_conditions.hpp"
#include "mmt/jko.hpp"
#include "mmt/pde.hpp"
#include "mmt/transport.hpp"

using namespace mmt;

namespace {

int g_failures = 0;

void report(int criterion, const char* label, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, label,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

MobilityModel linear_mobility() {
  auto m = MobilityModel::fully_decoupled(
      {ScalarMobility::expression(Expr::parse("z1"), 0.0, 3.0)});
  m.set_c3_exempt(true);
  return m;
}

MobilityModel decoupled01(int n) {
  std::vector<ScalarMobility> ms(n, ScalarMobility::quadratic(0.0, 1.0));
  return MobilityModel::fully_decoupled(std::move(ms));
}

GridDensity gauss(const Grid1D& grid, double center, double sigma, double mass,
                  double base = 0.0) {
  ProfileSpec p{"gaussian-bump"};
  p.center = center;
  p.sigma = sigma;
  p.mass = mass;
  p.base = base;
  return make_density(grid, {p});
}

GridDensity sine_state(const Grid1D& grid, double base, double amp, double phase) {
  GridDensity mu{grid, Matrix(grid.cells, 1)};
  for (int i = 0; i < grid.cells; ++i)
    mu.values(i, 0) =
        base + amp * std::sin(2.0 * M_PI * grid.cell_x(i) /
                                  (grid.x_max - grid.x_min) +
                              phase);
  return mu;
}

// shared benchmark assets
struct Run8 {
  MobilityModel model = decoupled01(2);
  Grid1D grid{-1.0, 1.0, 64};
  EnergySpec spec;
  GridDensity mu0{Grid1D{}, Matrix()};
  JkoTrajectory jko;
  FdTrajectory fd;
  double relative = 0.0;
  double runtime = 0.0;
};

EnergySpec run8_spec(int n, const GridDensity* mass_source) {
  EnergySpec spec;
  spec.f = EnergyFunction::quadratic(Matrix::Identity(n, n));
  spec.C_f = 1.0;
  spec.eta.push_back(Expr::parse("0.25 * exp(-1/(1 - (x/0.5)^2))"));
  spec.eta.push_back(Expr::parse("-0.25 * exp(-1/(1 - (x/0.5)^2))"));
  spec.eta_support_lo = -0.5;
  spec.eta_support_hi = 0.5;
  spec.zbar = Vector::Zero(n);
  spec.ref_case = RefCase::A;
  if (mass_source) {
    spec.mass_target.resize(n);
    for (int j = 0; j < n; ++j) spec.mass_target[j] = mass_source->mass(j);
  }
  return spec;
}

GridDensity run8_initial(const Grid1D& grid) {
  ProfileSpec a{"gaussian-bump"};
  a.center = -0.3;
  a.sigma = 0.2;
  a.mass = 0.12;
  a.base = 0.1;
  ProfileSpec b = a;
  b.center = 0.25;
  b.sigma = 0.24;
  b.mass = 0.1;
  b.base = 0.15;
  return make_density(grid, {a, b});
}

Run8 execute_run8(int refine, double rel_tol = 1e-7) {
  Run8 r;
  r.grid = Grid1D{-1.0, 1.0, 64 * refine};
  r.mu0 = run8_initial(r.grid);
  r.spec = run8_spec(2, &r.mu0);
  r.spec.validate(r.model);
  JkoOptions opts;
  opts.inner_steps = 4 * refine;
  opts.solver.rel_energy_tol = rel_tol;
  const auto t0 = std::chrono::steady_clock::now();
  r.jko = jko_run(r.model, r.spec, r.mu0, 0.0125 / refine, 0.1, opts);
  FdConfig fdc;
  fdc.record_stride = 8;
  r.fd = fd_solve(r.model, r.spec, r.mu0, 0.1, fdc);
  r.runtime = seconds_since(t0);
  r.relative = compare_jko_fd(r.jko, r.fd, r.spec.zbar).relative;
  return r;
}

}  // namespace

int main() {
  std::printf("acceptance suite\n================\n");

  // ---- criterion 1: W2 oracle equivalence --------------------------------
  Grid1D grid1{-3.0, 3.0, 64};
  auto model1 = linear_mobility();
  GridDensity c1_mu0 = gauss(grid1, -0.5, 0.15, 1.0);
  GridDensity c1_mu1 = gauss(grid1, 0.5, 0.15, 1.0);
  SolverOptions opts1;
  opts1.time_steps = 16;
  GeodesicResult c1_res;
  {
    const auto t0 = std::chrono::steady_clock::now();
    c1_res = solve_distance(model1, c1_mu0, c1_mu1, opts1);
    const double secs = seconds_since(t0);
    const double w2 = quantile_w2(c1_mu0, c1_mu1);
    const double rel = std::abs(c1_res.distance - w2) / w2;
    report(1, "W2 oracle equivalence", rel <= 0.02 && secs <= 60.0 && c1_res.converged,
           fmt("distance %.6f vs W2 %.6f, rel %.4f%%, %.1fs", c1_res.distance, w2,
               100 * rel, secs));
  }

  // ---- criterion 2: decoupled sum identity -------------------------------
  auto model2 = decoupled01(2);
  Grid1D grid2{0.0, 1.0, 64};
  GeodesicResult c2_res;
  {
    GridDensity a{grid2, Matrix(64, 2)}, b{grid2, Matrix(64, 2)};
    a.values.col(0) = sine_state(grid2, 0.45, 0.12, 0.0).values;
    a.values.col(1) = sine_state(grid2, 0.55, 0.08, 1.0).values;
    b.values.col(0) = sine_state(grid2, 0.45, 0.12, 2.0).values;
    b.values.col(1) = sine_state(grid2, 0.55, 0.08, 2.7).values;
    SolverOptions opts;
    opts.time_steps = 16;
    c2_res = solve_distance(model2, a, b, opts);
    auto scalar = decoupled01(1);
    double sum_sq = 0.0;
    for (int j = 0; j < 2; ++j) {
      GridDensity aj{grid2, a.values.col(j)}, bj{grid2, b.values.col(j)};
      const double dj = solve_distance(scalar, aj, bj, opts).distance;
      sum_sq += dj * dj;
    }
    const double d2 = c2_res.distance * c2_res.distance;
    const double defect = std::abs(d2 - sum_sq) / d2;
    report(2, "decoupled sum identity", defect <= 1e-3 && c2_res.converged,
           fmt("d^2 %.8f vs sum %.8f, defect %.3e", d2, sum_sq, defect));
  }

  // ---- criterion 3: constant-speed geodesics -----------------------------
  {
    auto ratio = [](const GeodesicResult& res) {
      const Vector& a = res.per_slice_action;
      const double mean = a.mean();
      const double sd = std::sqrt((a.array() - mean).square().sum() / a.size());
      return mean > 0 ? sd / mean : 0.0;
    };
    const double r1 = ratio(c1_res), r2 = ratio(c2_res);
    report(3, "constant-speed geodesics", r1 <= 0.05 && r2 <= 0.05,
           fmt("stdev/mean %.4f (run 1), %.4f (run 2)", r1, r2));
  }

  // ---- criterion 4: metric axioms ----------------------------------------
  {
    auto scalar = decoupled01(1);
    Grid1D grid{0.0, 1.0, 32};
    SolverOptions opts;
    opts.time_steps = 8;
    const double tol = opts.solver_tol;
    uint64_t rng = 2024;
    auto next = [&rng]() {
      rng ^= rng << 13;
      rng ^= rng >> 7;
      rng ^= rng << 17;
      return static_cast<double>(rng % 100003) / 100003.0;
    };
    double worst_sym = 0.0, worst_tri = -1.0;
    bool ok = true;
    for (int trial = 0; trial < 10; ++trial) {
      GridDensity m0 = sine_state(grid, 0.5, 0.1, 2 * M_PI * next());
      GridDensity m1 = sine_state(grid, 0.5, 0.1, 2 * M_PI * next());
      GridDensity m2 = sine_state(grid, 0.5, 0.1, 2 * M_PI * next());
      const double d01 = solve_distance(scalar, m0, m1, opts).distance;
      const double d10 = solve_distance(scalar, m1, m0, opts).distance;
      const double d12 = solve_distance(scalar, m1, m2, opts).distance;
      const double d02 = solve_distance(scalar, m0, m2, opts).distance;
      worst_sym = std::max(worst_sym, std::abs(d01 - d10));
      worst_tri = std::max(worst_tri, d02 - d01 - d12);
      ok = ok && std::abs(d01 - d10) <= 2 * tol && d02 <= d01 + d12 + 3 * tol;
    }
    report(4, "metric axioms on 10 random triples", ok,
           fmt("max symmetry defect %.2e (<= %.1e), max triangle defect %.2e (<= %.1e)",
               worst_sym, 2 * tol, worst_tri, 3 * tol));
  }

  // ---- criterion 5: condition suite --------------------------------------
  {
    SamplePlan plan;
    plan.points = 2048;
    plan.directions = 64;
    plan.margin = 1e-3;
    plan.seed = 5;
    bool all_ok = true;
    std::string note;
    auto clock_check = [&](const char* name, auto&& fn, Verdict want) {
      const auto t0 = std::chrono::steady_clock::now();
      const ConditionReport rep = fn();
      const double secs = seconds_since(t0);
      const bool ok = rep.verdict == want && secs <= 30.0;
      if (!ok)
        note += fmt("%s: %s in %.1fs (wanted %s); ", name,
                    to_string(rep.verdict).c_str(), secs, to_string(want).c_str());
      all_ok = all_ok && ok;
    };

    auto dec = decoupled01(2);
    clock_check("dec C0", [&] { return check_C0(dec, 512, plan.seed); }, Verdict::Pass);
    clock_check("dec C1", [&] { return check_C1(dec, plan); }, Verdict::Pass);
    clock_check("dec C2", [&] { return check_C2(dec, plan, false); }, Verdict::Pass);
    clock_check("dec C3", [&] { return check_C3(dec, 512, plan.seed); }, Verdict::Pass);
    clock_check("dec C2'", [&] { return check_C2(dec, plan, true); }, Verdict::Fail);

    double eps_accept = 0.0;
    {
      const auto t0 = std::chrono::steady_clock::now();
      for (double eps : {0.2, 0.1, 0.05, 0.02, 0.01}) {
        auto rep = check_C2(MobilityModel::perturbed_decoupled(eps), plan, true);
        if (rep.verdict == Verdict::Pass) {
          eps_accept = eps;
          break;
        }
      }
      const double secs = seconds_since(t0);
      if (eps_accept == 0.0 || secs > 150.0) {
        all_ok = false;
        note += fmt("perturbed C2' sweep failed (%.1fs); ", secs);
      }
    }

    auto vol = MobilityModel::volume_filling(2);
    clock_check("vol C1", [&] { return check_C1(vol, plan); }, Verdict::Pass);
    clock_check("vol C2", [&] { return check_C2(vol, plan, false); }, Verdict::Pass);
    clock_check("vol C3", [&] { return check_C3(vol, 512, plan.seed); }, Verdict::Pass);

    auto ball = MobilityModel::radial_ball(2);
    clock_check("ball C1", [&] { return check_C1(ball, plan); }, Verdict::Pass);
    clock_check("ball C2'", [&] { return check_C2(ball, plan, true); }, Verdict::Pass);
    clock_check("ball C3", [&] { return check_C3(ball, 512, plan.seed); }, Verdict::Pass);

    Matrix Qcpl(2, 2);
    Qcpl << 2.0, 1.0, 1.0, 2.0;
    clock_check("mccann coupled",
                [&] { return check_mccann(dec, EnergyFunction::quadratic(Qcpl), plan); },
                Verdict::Fail);
    clock_check("mccann f=h",
                [&] { return check_mccann(dec, EnergyFunction::model_potential(), plan); },
                Verdict::Pass);
    Matrix Qsep = 2.0 * Matrix::Identity(2, 2);
    clock_check("mccann decoupled convex",
                [&] { return check_mccann(dec, EnergyFunction::quadratic(Qsep), plan); },
                Verdict::Pass);

    report(5, "condition suite", all_ok,
           all_ok ? fmt("all verdicts as proved; strict C2' accepted at eps = %.2f",
                        eps_accept)
                  : note);
  }

  // ---- criterion 6: lambda formula ---------------------------------------
  {
    auto dec = decoupled01(2);
    SamplePlan plan;
    plan.points = 2048;
    plan.directions = 64;
    plan.margin = 1e-3;
    const double alpha = 1.0, R = 1.0;
    const double lambda_cf = lambda_closed_form_decoupled(dec, alpha, R);
    auto rep = check_potential_convexity(dec, alpha, R, lambda_cf, plan);
    const double lambda_est = estimate_lambda(dec, alpha, R, plan);
    report(6, "potential-convexity lambda formula",
           rep.verdict == Verdict::Pass && lambda_est >= lambda_cf,
           fmt("closed form %.4f: %s; sampled estimate %.4f", lambda_cf,
               to_string(rep.verdict).c_str(), lambda_est));
  }

  // ---- criterion 7: heat-case oracle -------------------------------------
  {
    auto model = decoupled01(2);
    Grid1D grid{-2.0, 2.0, 128};
    ProfileSpec pa{"gaussian-bump"};
    pa.center = -0.2;
    pa.sigma = 0.18;
    pa.mass = 0.1;
    pa.base = 0.25;
    ProfileSpec pb = pa;
    pb.center = 0.15;
    pb.sigma = 0.22;
    pb.mass = 0.08;
    pb.base = 0.3;
    GridDensity mu0 = make_density(grid, {pa, pb});
    EnergySpec spec;
    spec.f = EnergyFunction::model_potential();
    spec.C_f = 4.0;
    spec.zbar = Vector::Constant(2, 0.3);
    spec.ref_case = RefCase::B;
    FdTrajectory traj = fd_solve(model, spec, mu0, 0.05);
    GridDensity kernel = heat_solve(mu0, 0.05);
    const double rel =
        (traj.states.back() - kernel.values).norm() / kernel.values.norm();
    report(7, "heat-case oracle equivalence", rel <= 1e-3,
           fmt("L2 relative error %.2e at N=128, T=0.05", rel));
  }

  // ---- criterion 8: JKO vs FD on the benchmark system --------------------
  Run8 run8 = execute_run8(1);
  {
    bool converged = true;
    for (const auto& r : run8.jko.records) converged = converged && r.converged;
    report(8, "JKO vs FD space-time discrepancy",
           run8.relative <= 0.05 && run8.runtime <= 600.0 && converged,
           fmt("relative L2 %.4f (<= 0.05), runtime %.0fs", run8.relative,
               run8.runtime));
  }

  // ---- criterion 9: estimate suite on run 8 ------------------------------
  {
    DiagnosticBundle bundle;
    bundle.model = &run8.model;
    bundle.spec = &run8.spec;
    bundle.jko = &run8.jko;
    bundle.fd = &run8.fd;
    auto verdicts = run_diagnostics(
        bundle, {"energy_monotone", "telescoping_distance", "addreg_dissipation",
                 "introapriori_dissipation", "moment_bound"});
    bool ok = true;
    std::string note;
    for (const auto& v : verdicts) {
      ok = ok && v.pass && !v.inconclusive;
      if (!v.pass)
        note += fmt("%s: lhs %.3e rhs %.3e slack %.3e; ", v.name.c_str(), v.lhs, v.rhs,
                    v.slack);
    }
    double mass_defect = 0.0;
    for (int k = 0; k <= run8.jko.steps(); ++k)
      for (int j = 0; j < 2; ++j)
        mass_defect = std::max(
            mass_defect, std::abs(run8.jko.masses(k, j) - run8.jko.masses(0, j)));
    ok = ok && mass_defect <= 1e-10;
    report(9, "estimate suite on run 8", ok,
           ok ? fmt("all estimates hold; mass defect %.2e", mass_defect)
              : note + fmt("mass defect %.2e", mass_defect));
  }

  // ---- criterion 10: smoothing bound --------------------------------------
  {
    const auto& m = model1.scalar_mobilities()[0];
    SolverOptions opts;
    opts.time_steps = 16;
    bool ok = true;
    std::string note;
    for (double delta : {1e-3, 4e-3}) {
      GridDensity smoothed = heat_solve(c1_mu0, delta);
      const double d = solve_distance(model1, c1_mu0, smoothed, opts).distance;
      double drop = 0.0;
      for (int i = 0; i < grid1.cells; ++i)
        drop += m.h(c1_mu0.values(i, 0)) - m.h(smoothed.values(i, 0));
      drop *= grid1.dx();
      const bool pass = d * d <= delta * drop + 3.0 * opts.solver_tol;
      ok = ok && pass;
      note += fmt("delta %.0e: d^2 %.3e vs bound %.3e; ", delta, d * d,
                  delta * drop + 3.0 * opts.solver_tol);
    }
    report(10, "smoothing bound", ok, note);
  }

  // ---- criterion 11: contraction probe ------------------------------------
  {
    SolverOptions opts;
    opts.time_steps = 16;
    auto [before, after] = wm_contraction_probe(model1, c1_mu0, c1_mu1, 0.01, opts);
    report(11, "heat-flow contraction probe", after <= 1.02 * before,
           fmt("d_before %.6f, d_after %.6f, ratio %.4f", before, after,
               after / std::max(before, 1e-30)));
  }

  // ---- criterion 12: weak-form residual refinement ------------------------
  {
    std::vector<double> residuals;
    std::string note;
    for (int refine : {1, 2, 4}) {
      Run8 r = refine == 1 ? std::move(run8) : execute_run8(refine);
      const double res = weak_form_residual_jko(r.model, r.spec, r.jko);
      residuals.push_back(res);
      note += fmt("x%d: %.4e; ", refine, res);
    }
    const bool ok = residuals[1] < residuals[0] && residuals[2] < residuals[1];
    report(12, "weak-form residual decreases under refinement", ok, note);
  }

  std::printf("================\n%s (%d failure%s)\n",
              g_failures == 0 ? "ALL CRITERIA PASSED" : "CRITERIA FAILED", g_failures,
              g_failures == 1 ? "" : "s");
  return g_failures == 0 ? 0 : 1;
}
