#include "mmt/runner.hpp"

#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "mmt/csv.hpp"
#include "mmt/errors.hpp"

namespace mmt {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  out += '"';
  return out;
}

void write_resolved(const RunConfig& cfg, const fs::path& outdir) {
  atomic_write_text(outdir / "resolved_config.json", cfg.resolved_text());
}

std::string join_vector(const Vector& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += CsvWriter::format(v[i]);
  }
  return out;
}

std::vector<std::string> trajectory_header(int n) {
  std::vector<std::string> h{"k", "t", "energy", "heat_entropy", "step_distance",
                             "second_moment"};
  for (int j = 0; j < n; ++j) h.push_back("mass_" + std::to_string(j + 1));
  return h;
}

void write_jko_outputs(const RunConfig& cfg, const JkoTrajectory& traj,
                       const fs::path& outdir) {
  const int n = traj.iterates.front().components();
  CsvWriter csv(trajectory_header(n));
  for (size_t k = 0; k < traj.iterates.size(); ++k) {
    std::vector<double> row{static_cast<double>(k), static_cast<double>(k) * traj.tau,
                            traj.energies[k], traj.heat_entropies[k],
                            k == 0 ? 0.0 : traj.step_distances[k - 1],
                            traj.second_moments[k]};
    for (int j = 0; j < n; ++j) row.push_back(traj.masses(static_cast<int>(k), j));
    csv.add_row(row);
  }
  csv.write(outdir / "trajectory.csv");

  CsvWriter rec({"k", "iterations", "converged", "gap", "residual",
                 "projection_magnitude", "mass_defect", "mollified"});
  for (size_t k = 0; k < traj.records.size(); ++k) {
    const auto& r = traj.records[k];
    rec.add_row({static_cast<double>(k + 1), static_cast<double>(r.iterations),
                 r.converged ? 1.0 : 0.0, r.gap, r.residual, r.projection_magnitude,
                 r.mass_defect, r.mollified ? 1.0 : 0.0});
  }
  rec.write(outdir / "steps.csv");

  const int stride = std::max(1, cfg.output.stride);
  for (size_t k = 0; k < traj.iterates.size(); ++k) {
    if (k % stride != 0 && k + 1 != traj.iterates.size()) continue;
    std::ostringstream name;
    name << "density_" << std::setw(6) << std::setfill('0') << k << ".csv";
    write_density_csv(outdir / "states" / name.str(), traj.iterates[k]);
  }

  json meta;
  meta["kind"] = "jko";
  meta["tau"] = traj.tau;
  meta["steps"] = traj.steps();
  meta["inf_energy_estimate"] = traj.inf_energy_estimate;
  meta["snapshot_stride"] = stride;
  meta["time_interpolation"] = "piecewise-constant on ((k-1) tau, k tau]";
  atomic_write_text(outdir / "run.json", meta.dump(2) + "\n");
}

void write_fd_outputs(const FdTrajectory& traj, const fs::path& outdir) {
  const int n = static_cast<int>(traj.states.front().cols());
  std::vector<std::string> h{"t", "heat_entropy", "dissipation_budget", "second_moment"};
  for (int j = 0; j < n; ++j) h.push_back("mass_" + std::to_string(j + 1));
  CsvWriter csv(h);
  for (int m = 0; m < traj.records(); ++m) {
    GridDensity mu{traj.grid, traj.states[m]};
    std::vector<double> row{traj.times[m], traj.heat_entropies[m],
                            traj.dissipation_budget[m],
                            second_moment(mu, Vector::Zero(n))};
    for (int j = 0; j < n; ++j) row.push_back(mu.mass(j));
    csv.add_row(row);
  }
  csv.write(outdir / "trajectory.csv");
  for (int m = 0; m < traj.records(); ++m) {
    std::ostringstream name;
    name << "density_" << std::setw(6) << std::setfill('0') << m << ".csv";
    write_density_csv(outdir / "states" / name.str(),
                      GridDensity{traj.grid, traj.states[m]});
  }
  json meta;
  meta["kind"] = "fd";
  meta["dt"] = traj.dt;
  meta["total_steps"] = traj.total_steps;
  meta["max_projection"] = traj.max_projection;
  atomic_write_text(outdir / "run.json", meta.dump(2) + "\n");
}

}  // namespace

void write_geodesic_csv(const fs::path& path, const TransportPath& p) {
  const int n = p.components();
  std::vector<std::string> header{"t", "x"};
  for (int j = 0; j < n; ++j) header.push_back("mu_" + std::to_string(j + 1));
  for (int j = 0; j < n; ++j) header.push_back("w_" + std::to_string(j + 1));
  CsvWriter csv(header);
  const int K = p.steps();
  for (int k = 0; k <= K; ++k) {
    for (int i = 0; i < p.cells(); ++i) {
      std::vector<double> row{p.dt() * k, p.grid.cell_x(i)};
      for (int j = 0; j < n; ++j) row.push_back(p.densities[k](i, j));
      // fluxes live on faces and half slices; report the cell average of the
      // adjacent half slices
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        int cnt = 0;
        for (int kk : {k - 1, k}) {
          if (kk < 0 || kk >= K) continue;
          acc += 0.5 * (p.fluxes[kk](i, j) + p.fluxes[kk](i + 1, j));
          ++cnt;
        }
        row.push_back(cnt ? acc / cnt : 0.0);
      }
      csv.add_row(row);
    }
  }
  csv.write(path);
}

int run_distance(const RunConfig& cfg, const fs::path& outdir, bool write_geodesic,
                 std::ostream& log) {
  fs::create_directories(outdir);
  write_resolved(cfg, outdir);
  MobilityModel model = cfg.make_model();
  if (!cfg.mu0 || !cfg.mu1) throw ConfigError("/endpoints", "distance needs endpoints");
  GridDensity mu0 = cfg.render_density(*cfg.mu0);
  GridDensity mu1 = cfg.render_density(*cfg.mu1);
  GeodesicResult res = solve_distance(model, mu0, mu1, cfg.solver_options());

  CsvWriter csv({"distance", "iterations", "converged", "gap", "residual", "mollified",
                 "interior_lift"});
  csv.add_row({res.distance, static_cast<double>(res.iterations),
               res.converged ? 1.0 : 0.0, res.primal_dual_gap, res.continuity_residual,
               res.mollified_endpoints ? 1.0 : 0.0, res.interior_lift});
  csv.write(outdir / "summary.csv");
  if (write_geodesic) write_geodesic_csv(outdir / "geodesic.csv", res.path);
  log << "distance " << CsvWriter::format(res.distance) << " (iterations "
      << res.iterations << ", converged " << (res.converged ? "yes" : "no") << ")\n";
  return 0;
}

int run_jko(const RunConfig& cfg, const fs::path& outdir, std::ostream& log) {
  fs::create_directories(outdir);
  write_resolved(cfg, outdir);
  MobilityModel model = cfg.make_model();
  if (!cfg.initial) throw ConfigError("/initial", "jko needs an initial density");
  if (!cfg.jko) throw ConfigError("/jko", "missing jko block");
  GridDensity mu0 = cfg.render_density(*cfg.initial);
  EnergySpec spec = cfg.make_energy(model, &mu0);
  spec.validate(model);
  JkoTrajectory traj =
      jko_run(model, spec, mu0, cfg.jko->tau, cfg.jko->t_final, cfg.jko_options());
  write_jko_outputs(cfg, traj, outdir);
  log << "jko: " << traj.steps() << " steps, final energy "
      << CsvWriter::format(traj.energies.back()) << "\n";
  for (const auto& r : traj.records)
    if (!r.converged) {
      log << "jko: inner solve failed to converge; trajectory halted\n";
      return 65;
    }
  return 0;
}

int run_fd(const RunConfig& cfg, const fs::path& outdir, std::ostream& log) {
  fs::create_directories(outdir);
  write_resolved(cfg, outdir);
  MobilityModel model = cfg.make_model();
  if (!cfg.initial) throw ConfigError("/initial", "fd-solve needs an initial density");
  GridDensity mu0 = cfg.render_density(*cfg.initial);
  EnergySpec spec = cfg.make_energy(model, &mu0);
  spec.validate(model);
  FdTrajectory traj = fd_solve(model, spec, mu0, cfg.fd.t_final, cfg.fd_config());
  write_fd_outputs(traj, outdir);
  log << "fd: " << traj.total_steps << " steps, dt " << CsvWriter::format(traj.dt)
      << ", max projection " << CsvWriter::format(traj.max_projection) << "\n";
  return 0;
}

int run_heat(const RunConfig& cfg, const fs::path& outdir, std::ostream& log) {
  fs::create_directories(outdir);
  write_resolved(cfg, outdir);
  if (!cfg.initial) throw ConfigError("/initial", "heat needs an initial density");
  GridDensity mu0 = cfg.render_density(*cfg.initial);
  GridDensity out = heat_solve(mu0, cfg.heat.t);
  write_density_csv(outdir / "density_out.csv", out);
  log << "heat: evolved to t = " << cfg.heat.t << "\n";
  return 0;
}

int run_transport(const RunConfig& cfg, const fs::path& outdir, std::ostream& log) {
  fs::create_directories(outdir);
  write_resolved(cfg, outdir);
  MobilityModel model = cfg.make_model();
  if (!cfg.initial) throw ConfigError("/initial", "transport-solve needs an initial density");
  if (!cfg.transport) throw ConfigError("/transport", "missing transport block");
  GridDensity mu0 = cfg.render_density(*cfg.initial);
  std::vector<Expr> rho;
  for (const auto& s : cfg.transport->rho) rho.push_back(Expr::parse(s));
  FdTrajectory traj = transport_solve(model, cfg.transport->alpha, rho, mu0,
                                      cfg.transport->t_final, cfg.fd_config());
  write_fd_outputs(traj, outdir);
  log << "transport: " << traj.total_steps << " steps, dt "
      << CsvWriter::format(traj.dt) << "\n";
  return 0;
}

int run_compare(const RunConfig& cfg, const fs::path& outdir, std::ostream& log) {
  fs::create_directories(outdir);
  write_resolved(cfg, outdir);
  MobilityModel model = cfg.make_model();
  if (!cfg.initial || !cfg.jko)
    throw ConfigError("/", "compare needs initial and jko blocks");
  GridDensity mu0 = cfg.render_density(*cfg.initial);
  EnergySpec spec = cfg.make_energy(model, &mu0);
  spec.validate(model);

  JkoTrajectory jt =
      jko_run(model, spec, mu0, cfg.jko->tau, cfg.jko->t_final, cfg.jko_options());
  write_jko_outputs(cfg, jt, outdir / "jko");
  FdConfig fdc = cfg.fd_config();
  FdTrajectory ft = fd_solve(model, spec, mu0, cfg.jko->t_final, fdc);
  write_fd_outputs(ft, outdir / "fd");

  CompareResult cr = compare_jko_fd(jt, ft, spec.zbar);
  CsvWriter csv({"l2_discrepancy", "reference_norm", "relative"});
  csv.add_row({cr.discrepancy, cr.reference_norm, cr.relative});
  csv.write(outdir / "compare.csv");
  log << "compare: relative space-time L2 discrepancy "
      << CsvWriter::format(cr.relative) << "\n";
  return 0;
}

int run_check_conditions(const RunConfig& cfg, const fs::path& outdir, std::ostream& log) {
  fs::create_directories(outdir);
  write_resolved(cfg, outdir);
  MobilityModel model = cfg.make_model();
  if (!cfg.conditions) throw ConfigError("/conditions", "missing conditions block");
  const ConditionsConfig& cc = *cfg.conditions;
  SamplePlan plan = cc.plan;
  plan.seed = cfg.output.seed;

  std::vector<ConditionReport> reports;
  for (const std::string& name : cc.checks) {
    if (name == "C0") {
      reports.push_back(check_C0(model, cc.boundary_samples, cfg.output.seed));
    } else if (name == "C1") {
      reports.push_back(check_C1(model, plan));
    } else if (name == "C2") {
      reports.push_back(check_C2(model, plan, false));
    } else if (name == "C2strict") {
      reports.push_back(check_C2(model, plan, true));
    } else if (name == "C3") {
      reports.push_back(check_C3(model, cc.boundary_samples, cfg.output.seed));
    } else if (name == "mccann") {
      if (!cc.mccann_f) throw ConfigError("/conditions/mccann_f", "needed for mccann");
      EnergyFunction f = [&]() {
        const EnergyConfig& e = *cc.mccann_f;
        if (e.f_type == "quadratic") {
          const int n = model.dim();
          Matrix Q(n, n);
          for (int i = 0; i < n; ++i)
            for (int jx = 0; jx < n; ++jx) Q(i, jx) = e.Q.at(i).at(jx);
          return EnergyFunction::quadratic(Q, e.eps,
                                           e.r_expr.empty() ? Expr()
                                                            : Expr::parse(e.r_expr));
        }
        if (e.f_type == "expression")
          return EnergyFunction::expression(Expr::parse(e.f_expr), model.dim());
        return EnergyFunction::model_potential();
      }();
      reports.push_back(check_mccann(model, f, plan));
    } else if (name == "potential") {
      const double lambda = cc.potential_lambda
                                ? *cc.potential_lambda
                                : estimate_lambda(model, cc.potential_alpha,
                                                  cc.potential_R, plan);
      ConditionReport rep = check_potential_convexity(model, cc.potential_alpha,
                                                      cc.potential_R, lambda, plan);
      reports.push_back(rep);
    } else if (name == "diag-domination") {
      if (!cc.diag_reference)
        throw ConfigError("/conditions/diag_reference", "needed for diag-domination");
      MobilityModel ref = RunConfig::make_model_from(*cc.diag_reference, cfg.space);
      std::vector<double> grid = cc.k_grid;
      if (grid.empty()) grid = {0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
      reports.push_back(check_diag_domination(model, ref, grid, plan));
    } else if (name == "concavity") {
      if (!model.diagonal())
        throw ConfigError("/conditions", "concavity applies to fully decoupled models");
      for (const auto& m : model.scalar_mobilities())
        reports.push_back(check_concavity_scalar(m));
    } else {
      throw ConfigError("/conditions/checks", "unknown check '" + name + "'");
    }
  }

  CsvWriter csv({"condition", "verdict", "worst_value", "parameter", "samples_checked",
                 "witness_z", "witness_zeta", "witness_raw", "note"});
  bool any_fail = false, any_inconclusive = false;
  for (const auto& r : reports) {
    any_fail = any_fail || r.verdict == Verdict::Fail;
    any_inconclusive = any_inconclusive || r.verdict == Verdict::Inconclusive;
    std::vector<std::string> row{
        r.condition,
        to_string(r.verdict),
        CsvWriter::format(r.worst_value),
        CsvWriter::format(r.parameter),
        std::to_string(r.samples_checked),
        r.witness ? join_vector(r.witness->z) : "",
        r.witness && r.witness->zeta.size() ? join_vector(r.witness->zeta) : "",
        r.witness ? CsvWriter::format(r.witness->raw_value) : "",
        quote(r.note)};
    csv.add_row_raw(row);
    log << r.condition << ": " << to_string(r.verdict) << " (worst "
        << CsvWriter::format(r.worst_value) << ") " << r.note << "\n";
    if (r.witness && r.verdict == Verdict::Fail) {
      log << "  witness z = [" << join_vector(r.witness->z) << "]";
      if (r.witness->zeta.size()) log << ", zeta = [" << join_vector(r.witness->zeta) << "]";
      log << ", value " << CsvWriter::format(r.witness->raw_value) << "\n";
    }
  }
  csv.write(outdir / "conditions.csv");
  return any_fail ? 2 : (any_inconclusive ? 1 : 0);
}

JkoTrajectory load_jko_run(const fs::path& dir, const MobilityModel& model,
                           const EnergySpec& spec) {
  std::ifstream ms(dir / "run.json");
  if (!ms) throw InputError("diagnose: missing run.json in " + dir.string());
  json meta = json::parse(ms);
  if (meta.at("kind") != "jko") throw InputError("diagnose: run is not a jko run");
  if (meta.at("snapshot_stride").get<int>() != 1)
    throw InputError("diagnose: jko reconstruction needs snapshot stride 1");

  JkoTrajectory traj;
  traj.tau = meta.at("tau").get<double>();
  traj.inf_energy_estimate = meta.at("inf_energy_estimate").get<double>();
  const int K = meta.at("steps").get<int>();

  for (int k = 0; k <= K; ++k) {
    std::ostringstream name;
    name << "density_" << std::setw(6) << std::setfill('0') << k << ".csv";
    traj.iterates.push_back(read_density_csv(dir / "states" / name.str()));
  }
  traj.grid = traj.iterates.front().grid;
  const int n = traj.iterates.front().components();
  traj.masses.resize(K + 1, n);
  for (int k = 0; k <= K; ++k) {
    traj.energies.push_back(energy_E(model, spec, traj.iterates[k]));
    traj.heat_entropies.push_back(entropy_H(model, spec, traj.iterates[k]));
    traj.second_moments.push_back(second_moment(traj.iterates[k], spec.zbar));
    for (int j = 0; j < n; ++j)
      traj.masses(k, j) = traj.iterates[k].mass(j, spec.zbar[j]);
  }
  // step distances from the recorded trajectory.csv
  std::ifstream ts(dir / "trajectory.csv");
  if (!ts) throw InputError("diagnose: missing trajectory.csv");
  std::string line;
  std::getline(ts, line);  // header
  int k = 0;
  while (std::getline(ts, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (k > 0) traj.step_distances.push_back(row.at(4));
    ++k;
  }
  if (k != K + 1) throw InputError("diagnose: trajectory.csv row count mismatch");
  traj.records.resize(K);
  return traj;
}

FdTrajectory load_fd_run(const fs::path& dir) {
  std::ifstream ms(dir / "run.json");
  if (!ms) throw InputError("diagnose: missing run.json in " + dir.string());
  json meta = json::parse(ms);
  if (meta.at("kind") != "fd") throw InputError("diagnose: run is not an fd run");
  FdTrajectory traj;
  traj.dt = meta.at("dt").get<double>();
  traj.total_steps = meta.at("total_steps").get<int>();
  traj.max_projection = meta.at("max_projection").get<double>();

  std::ifstream ts(dir / "trajectory.csv");
  if (!ts) throw InputError("diagnose: missing trajectory.csv");
  std::string line;
  std::getline(ts, line);
  int m = 0;
  while (std::getline(ts, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    traj.times.push_back(row.at(0));
    traj.heat_entropies.push_back(row.at(1));
    traj.dissipation_budget.push_back(row.at(2));
    std::ostringstream name;
    name << "density_" << std::setw(6) << std::setfill('0') << m << ".csv";
    GridDensity mu = read_density_csv(dir / "states" / name.str());
    traj.states.push_back(mu.values);
    traj.grid = mu.grid;
    ++m;
  }
  return traj;
}

int run_diagnose(const RunConfig& cfg, const fs::path& outdir, std::ostream& log) {
  fs::create_directories(outdir);
  write_resolved(cfg, outdir);
  if (!cfg.diagnose) throw ConfigError("/diagnose", "missing diagnose block");
  const fs::path run_dir = cfg.diagnose->run_dir;
  RunConfig run_cfg = RunConfig::load(run_dir / "resolved_config.json");
  MobilityModel model = run_cfg.make_model();

  std::ifstream ms(run_dir / "run.json");
  if (!ms) throw InputError("diagnose: missing run.json in " + run_dir.string());
  json meta = json::parse(ms);
  const std::string kind = meta.at("kind").get<std::string>();

  DiagnosticBundle bundle;
  bundle.model = &model;
  bundle.solver_tol = cfg.discretization.solver_tol;
  bundle.seed = cfg.output.seed;

  std::optional<EnergySpec> spec;
  std::optional<JkoTrajectory> jt;
  std::optional<FdTrajectory> ft;
  if (kind == "jko") {
    const GridDensity mu0 = [&] {
      std::ostringstream name;
      name << "density_" << std::setw(6) << std::setfill('0') << 0 << ".csv";
      return read_density_csv(run_dir / "states" / name.str());
    }();
    spec = run_cfg.make_energy(model, &mu0);
    jt = load_jko_run(run_dir, model, *spec);
    bundle.spec = &*spec;
    bundle.jko = &*jt;
  } else if (kind == "fd") {
    ft = load_fd_run(run_dir);
    GridDensity mu0{ft->grid, ft->states.front()};
    spec = run_cfg.make_energy(model, &mu0);
    bundle.spec = &*spec;
    bundle.fd = &*ft;
  } else {
    throw InputError("diagnose: unsupported run kind '" + kind + "'");
  }

  std::vector<std::string> checks = cfg.diagnose->checks;
  if (checks.empty()) {
    if (kind == "jko")
      checks = {"energy_monotone", "telescoping_distance", "holder_bound",
                "addreg_dissipation", "moment_bound", "entropy_sandwich",
                "weak_form_residual"};
    else
      checks = {"introapriori_dissipation", "weak_form_residual"};
  }
  auto verdicts = run_diagnostics(bundle, checks);

  CsvWriter csv({"name", "lhs", "rhs", "slack", "pass", "refs"});
  bool any_fail = false;
  for (const auto& v : verdicts) {
    csv.add_row_raw({v.name, CsvWriter::format(v.lhs), CsvWriter::format(v.rhs),
                     CsvWriter::format(v.slack),
                     v.inconclusive ? "inconclusive" : (v.pass ? "1" : "0"),
                     quote(v.refs)});
    log << v.name << ": "
        << (v.inconclusive ? "inconclusive" : (v.pass ? "pass" : "FAIL")) << " (lhs "
        << CsvWriter::format(v.lhs) << ", rhs " << CsvWriter::format(v.rhs) << ", slack "
        << CsvWriter::format(v.slack) << ")\n";
    any_fail = any_fail || (!v.pass && !v.inconclusive);
  }
  csv.write(outdir / "verdicts.csv");
  return any_fail ? 1 : 0;
}

}  // namespace mmt
