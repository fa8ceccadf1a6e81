#include <doctest.h>

#include "mmt/diagnostics.hpp"

using namespace mmt;

namespace {

MobilityModel decoupled01(int n) {
  std::vector<ScalarMobility> ms(n, ScalarMobility::quadratic(0.0, 1.0));
  return MobilityModel::fully_decoupled(std::move(ms));
}

// a stationary trajectory: every iterate equals the energy minimizer
JkoTrajectory stationary_trajectory(const MobilityModel& model, const EnergySpec& spec,
                                    const Grid1D& grid, int steps) {
  JkoTrajectory traj;
  traj.tau = 0.05;
  traj.grid = grid;
  GridDensity mu{grid, Matrix::Constant(grid.cells, model.dim(), spec.zbar[0])};
  traj.inf_energy_estimate = 0.0;
  traj.masses.resize(steps + 1, model.dim());
  for (int k = 0; k <= steps; ++k) {
    traj.iterates.push_back(mu);
    traj.energies.push_back(energy_E(model, spec, mu));
    traj.heat_entropies.push_back(entropy_H(model, spec, mu));
    traj.second_moments.push_back(second_moment(mu, spec.zbar));
    for (int j = 0; j < model.dim(); ++j) traj.masses(k, j) = mu.mass(j, spec.zbar[j]);
    if (k > 0) {
      traj.step_distances.push_back(0.0);
      traj.records.push_back({});
    }
  }
  return traj;
}

}  // namespace

TEST_CASE("stationary trajectories pass every applicable check with zero margins") {
  auto model = decoupled01(1);
  Grid1D grid{-1.0, 1.0, 16};
  EnergySpec spec;
  spec.f = EnergyFunction::quadratic(Matrix::Identity(1, 1));
  spec.C_f = 1.0;
  spec.zbar = Vector::Constant(1, 0.5);
  spec.ref_case = RefCase::B;
  JkoTrajectory traj = stationary_trajectory(model, spec, grid, 4);

  DiagnosticBundle bundle;
  bundle.model = &model;
  bundle.spec = &spec;
  bundle.jko = &traj;
  auto verdicts = run_diagnostics(
      bundle, {"energy_monotone", "telescoping_distance", "holder_bound",
               "addreg_dissipation", "moment_bound", "entropy_sandwich"});
  for (const auto& v : verdicts) {
    INFO(v.name);
    CHECK_FALSE(v.inconclusive);
    CHECK(v.pass);
    CHECK(v.lhs <= v.rhs + v.slack);
  }
}

TEST_CASE("missing inputs yield inconclusive verdicts, not failures") {
  DiagnosticBundle empty;
  auto verdicts = run_diagnostics(empty, all_diagnostic_names());
  CHECK(verdicts.size() == all_diagnostic_names().size());
  for (const auto& v : verdicts) {
    CHECK(v.inconclusive);
    CHECK_FALSE(v.pass);
    CHECK(v.refs.find("missing") != std::string::npos);
  }
}

TEST_CASE("probe-backed verdicts") {
  DiagnosticBundle bundle;
  bundle.contraction = ContractionProbe{1.0, 1.01};
  bundle.decoupled = DecoupledSumProbe{2.0, {1.2, 0.8004}};
  bundle.smoothing.push_back(SmoothingProbe{1e-3, 1e-7, 2e-4});
  auto verdicts = run_diagnostics(
      bundle, {"contraction_probe", "decoupled_sum_identity", "smooth_approx_bound"});
  REQUIRE(verdicts.size() == 3);
  CHECK(verdicts[0].pass);  // 1.01 <= 1.02 * 1.0
  CHECK(verdicts[1].pass);  // defect 4e-4 <= 1e-3 * 2.0
  CHECK(verdicts[2].pass);  // 1e-7 <= 1e-3 * 2e-4 + 3 solver_tol

  bundle.contraction = ContractionProbe{1.0, 1.05};
  auto failing = run_diagnostics(bundle, {"contraction_probe"});
  CHECK_FALSE(failing[0].pass);
}

TEST_CASE("constant speed verdict reads the per-slice action") {
  GeodesicResult geo;
  geo.per_slice_action = Vector::Constant(8, 2.0);
  geo.per_slice_action[3] = 2.02;  // ~0.3% deviation
  DiagnosticBundle bundle;
  bundle.geodesic = &geo;
  auto verdicts = run_diagnostics(bundle, {"constant_speed"});
  CHECK(verdicts[0].pass);

  geo.per_slice_action[3] = 3.0;  // gross violation
  auto failing = run_diagnostics(bundle, {"constant_speed"});
  CHECK_FALSE(failing[0].pass);
}

TEST_CASE("unknown check names are reported inconclusive") {
  DiagnosticBundle bundle;
  auto verdicts = run_diagnostics(bundle, {"definitely_not_a_check"});
  REQUIRE(verdicts.size() == 1);
  CHECK(verdicts[0].inconclusive);
}
