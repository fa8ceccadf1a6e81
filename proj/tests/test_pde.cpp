#include <doctest.h>

#include <cmath>

#include "mmt/errors.hpp"
#include "mmt/initial_conditions.hpp"
#include "mmt/pde.hpp"

using namespace mmt;

namespace {

MobilityModel decoupled01(int n) {
  std::vector<ScalarMobility> ms(n, ScalarMobility::quadratic(0.0, 1.0));
  return MobilityModel::fully_decoupled(std::move(ms));
}

EnergySpec heat_spec(int n, const Vector& zbar) {
  EnergySpec spec;
  spec.f = EnergyFunction::model_potential();  // f = h: the heat reduction
  spec.C_f = 4.0;  // hess h = 1/m >= 4 on [0,1] for the quadratic mobility
  spec.zbar = zbar;
  spec.ref_case = RefCase::B;
  return spec;
}

GridDensity interior_bumps(const Grid1D& grid, int n) {
  std::vector<ProfileSpec> ps;
  for (int j = 0; j < n; ++j) {
    ProfileSpec p{"gaussian-bump"};
    p.center = -0.2 + 0.35 * j;
    p.sigma = 0.18;
    p.mass = 0.1;
    p.base = 0.25;
    ps.push_back(p);
  }
  return make_density(grid, ps);
}

}  // namespace

TEST_CASE("heat solve basics") {
  Grid1D grid{-2.0, 2.0, 128};
  GridDensity mu = interior_bumps(grid, 1);

  // t = 0 is the identity
  CHECK(heat_solve(mu, 0.0).values.isApprox(mu.values));

  // constants are fixed points (kernel has unit mass)
  GridDensity flat{grid, Matrix::Constant(128, 1, 0.37)};
  CHECK((heat_solve(flat, 0.05).values.array() - 0.37).abs().maxCoeff() <= 1e-14);

  CHECK_THROWS_AS(heat_solve(mu, -1.0), InputError);
}

TEST_CASE("gaussian bumps widen by 2t in variance") {
  Grid1D grid{-3.0, 3.0, 256};
  const double sigma = 0.2, t = 0.01;
  ProfileSpec p{"gaussian-bump"};
  p.center = 0.0;
  p.sigma = sigma;
  p.mass = 1.0;
  GridDensity mu = make_density(grid, {p});
  GridDensity evolved = heat_solve(mu, t);

  const double s2 = sigma * sigma + 2.0 * t;
  ProfileSpec q = p;
  q.sigma = std::sqrt(s2);
  GridDensity expected = make_density(grid, {q});
  const double rel = (evolved.values - expected.values).norm() / expected.values.norm();
  CHECK(rel <= 2e-3);
}

TEST_CASE("fd heat-case oracle equivalence") {
  auto model = decoupled01(2);
  Grid1D grid{-1.0, 1.0, 64};
  GridDensity mu0 = interior_bumps(grid, 2);
  EnergySpec spec = heat_spec(2, Vector::Constant(2, 0.3));

  const double T = 0.02;
  FdTrajectory traj = fd_solve(model, spec, mu0, T);
  GridDensity kernel = heat_solve(mu0, T);
  const double rel =
      (traj.states.back() - kernel.values).norm() / kernel.values.norm();
  MESSAGE("fd vs heat kernel relative L2: ", rel);
  CHECK(rel <= 1e-3);

  // conservative form: mass per component to 1e-12
  for (int j = 0; j < 2; ++j) {
    const double m0 = grid.dx() * traj.states.front().col(j).sum();
    const double mT = grid.dx() * traj.states.back().col(j).sum();
    CHECK(std::abs(mT - m0) <= 1e-12 * (1.0 + std::abs(m0)));
  }

  // interior data stays interior: no projection was needed
  CHECK(traj.max_projection <= 1e-10);
}

TEST_CASE("entropy dissipation budget holds per record window") {
  auto model = decoupled01(2);
  Grid1D grid{-1.0, 1.0, 48};
  GridDensity mu0 = interior_bumps(grid, 2);
  EnergySpec spec;
  spec.f = EnergyFunction::quadratic(Matrix::Identity(2, 2));
  spec.C_f = 1.0;
  spec.eta.push_back(Expr::parse("0.2 * exp(-1/(1 - (x/0.4)^2))"));
  spec.eta.push_back(Expr::parse("-0.2 * exp(-1/(1 - (x/0.4)^2))"));
  spec.eta_support_lo = -0.4;
  spec.eta_support_hi = 0.4;
  spec.zbar = Vector::Constant(2, 0.3);
  spec.ref_case = RefCase::B;

  FdConfig cfg;
  cfg.record_stride = 8;
  FdTrajectory traj = fd_solve(model, spec, mu0, 0.05, cfg);
  for (int m = 0; m + 1 < traj.records(); ++m) {
    const double drop = traj.heat_entropies[m] - traj.heat_entropies[m + 1];
    const double budget = traj.dissipation_budget[m + 1];
    CHECK(budget <= drop + 0.02 * (1.0 + std::abs(budget)));
  }
}

TEST_CASE("transport solve reduces to the heat flow when rho = 0") {
  auto model = decoupled01(1);
  Grid1D grid{-1.0, 1.0, 64};
  GridDensity mu0 = interior_bumps(grid, 1);
  const double alpha = 0.7, T = 0.02;
  FdTrajectory traj = transport_solve(model, alpha, {}, mu0, T);
  GridDensity kernel = heat_solve(mu0, alpha * T);
  const double rel =
      (traj.states.back() - kernel.values).norm() / kernel.values.norm();
  CHECK(rel <= 1e-3);
  CHECK(traj.max_projection == 0.0);  // interior preservation, short horizon
}

TEST_CASE("decoupled components evolve independently") {
  auto model2 = decoupled01(2);
  Grid1D grid{-1.0, 1.0, 48};
  GridDensity mu0 = interior_bumps(grid, 2);
  std::vector<Expr> rho2 = {Expr::parse("0.3*exp(-1/(1-(x/0.6)^2))"),
                            Expr::parse("-0.2*exp(-1/(1-(x/0.6)^2))")};
  FdTrajectory joint = transport_solve(model2, 1.0, rho2, mu0, 0.01);

  auto model1 = decoupled01(1);
  for (int j = 0; j < 2; ++j) {
    GridDensity muj{grid, mu0.values.col(j)};
    FdTrajectory single = transport_solve(model1, 1.0, {rho2[j]}, muj, 0.01);
    CHECK((joint.states.back().col(j) - single.states.back().col(0))
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
  }
}

TEST_CASE("cfl guard rejects an oversized prescribed step") {
  auto model = decoupled01(1);
  Grid1D grid{-1.0, 1.0, 32};
  GridDensity mu0 = interior_bumps(grid, 1);
  EnergySpec spec = heat_spec(1, Vector::Constant(1, 0.3));
  FdConfig cfg;
  cfg.dt = 1.0;  // far beyond the parabolic limit
  CHECK_THROWS_AS(fd_solve(model, spec, mu0, 0.1, cfg), NumericalError);
}

TEST_CASE("heat flow does not expand the transport distance") {
  auto model = MobilityModel::fully_decoupled(
      {ScalarMobility::expression(Expr::parse("z1"), 0.0, 3.0)});
  model.set_c3_exempt(true);
  Grid1D grid{-3.0, 3.0, 48};
  ProfileSpec a{"gaussian-bump"};
  a.center = -0.4;
  a.sigma = 0.2;
  a.mass = 1.0;
  ProfileSpec b = a;
  b.center = 0.4;
  GridDensity mu0 = make_density(grid, {a});
  GridDensity nu0 = make_density(grid, {b});

  SolverOptions opts;
  opts.time_steps = 8;
  auto [before, after] = wm_contraction_probe(model, mu0, nu0, 0.01, opts);
  MESSAGE("contraction probe: ", before, " -> ", after);
  CHECK(after <= before * 1.02);

  // trivial case: identical inputs stay at distance zero
  auto [b0, a0] = wm_contraction_probe(model, mu0, mu0, 0.01, opts);
  CHECK(b0 == 0.0);
  CHECK(a0 == 0.0);
}
