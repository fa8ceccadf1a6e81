#include "mmt/run_config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>

#include "mmt/csv.hpp"
#include "mmt/errors.hpp"

namespace mmt {

using nlohmann::json;

namespace {

void expect_keys(const json& j, const std::string& where,
                 std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(where + "/" + it.key(), "unknown key");
}

double need_number(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) throw ConfigError(where + "/" + key, "missing required number");
  if (!j[key].is_number()) throw ConfigError(where + "/" + key, "expected a number");
  return j[key].get<double>();
}

double opt_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  return j[key].get<double>();
}

int opt_int(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  return j[key].get<int>();
}

bool opt_bool(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  return j[key].get<bool>();
}

std::string need_string(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key) || !j[key].is_string())
    throw ConfigError(where + "/" + key, "missing required string");
  return j[key].get<std::string>();
}

std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

SpaceSpec parse_space(const json& j, const std::string& where) {
  expect_keys(j, where, {"kind", "lower", "upper", "dimension"});
  SpaceSpec s;
  s.kind = need_string(j, where, "kind");
  if (s.kind == "cuboid") {
    if (!j.contains("lower") || !j.contains("upper"))
      throw ConfigError(where, "cuboid needs lower and upper");
    s.lower = number_list(j["lower"], where + "/lower");
    s.upper = number_list(j["upper"], where + "/upper");
  } else if (s.kind == "simplex" || s.kind == "ball") {
    s.dimension = opt_int(j, "dimension", 0);
    if (s.dimension < 1) throw ConfigError(where + "/dimension", "required positive integer");
  } else {
    throw ConfigError(where + "/kind", "expected cuboid, simplex or ball");
  }
  return s;
}

MobilitySpec parse_mobility(const json& j, const std::string& where) {
  expect_keys(j, where,
              {"family", "mobilities", "epsilon", "dimension", "h", "c3_exempt",
               "derivative_mode", "fd_step", "interior_margin"});
  MobilitySpec m;
  m.family = need_string(j, where, "family");
  if (j.contains("mobilities")) {
    if (!j["mobilities"].is_array())
      throw ConfigError(where + "/mobilities", "expected an array");
    for (size_t i = 0; i < j["mobilities"].size(); ++i) {
      const json& mj = j["mobilities"][i];
      const std::string mw = where + "/mobilities/" + std::to_string(i);
      expect_keys(mj, mw, {"type", "expr"});
      const std::string type = need_string(mj, mw, "type");
      if (type == "quadratic")
        m.mobility_exprs.emplace_back();
      else if (type == "expression")
        m.mobility_exprs.push_back(need_string(mj, mw, "expr"));
      else
        throw ConfigError(mw + "/type", "expected quadratic or expression");
    }
  }
  m.epsilon = opt_number(j, "epsilon", 0.1);
  m.dimension = opt_int(j, "dimension", 0);
  if (j.contains("h")) m.h_expr = j["h"].get<std::string>();
  m.c3_exempt = opt_bool(j, "c3_exempt", false);
  if (j.contains("derivative_mode")) {
    m.derivative_mode = j["derivative_mode"].get<std::string>();
    if (m.derivative_mode != "analytic" && m.derivative_mode != "finite-difference")
      throw ConfigError(where + "/derivative_mode",
                        "expected analytic or finite-difference");
  }
  m.fd_step = opt_number(j, "fd_step", 1e-5);
  m.interior_margin = opt_number(j, "interior_margin", 1e-9);
  return m;
}

ProfileSpec parse_profile(const json& j, const std::string& where) {
  expect_keys(j, where,
              {"family", "center", "sigma", "mass", "base", "lo", "hi", "width", "left",
               "right", "value"});
  ProfileSpec p;
  p.family = need_string(j, where, "family");
  p.center = opt_number(j, "center", 0.0);
  p.sigma = opt_number(j, "sigma", 0.1);
  p.mass = opt_number(j, "mass", 1.0);
  p.base = opt_number(j, "base", 0.0);
  p.lo = opt_number(j, "lo", 0.0);
  p.hi = opt_number(j, "hi", 0.0);
  p.width = opt_number(j, "width", 0.1);
  p.left = opt_number(j, "left", 0.0);
  p.right = opt_number(j, "right", 0.0);
  p.value = opt_number(j, "value", 0.0);
  return p;
}

DensitySpec parse_density(const json& j, const std::string& where) {
  expect_keys(j, where, {"kind", "components", "path"});
  DensitySpec d;
  d.kind = need_string(j, where, "kind");
  if (d.kind == "profiles") {
    if (!j.contains("components") || !j["components"].is_array())
      throw ConfigError(where + "/components", "expected an array of profiles");
    for (size_t i = 0; i < j["components"].size(); ++i)
      d.components.push_back(
          parse_profile(j["components"][i], where + "/components/" + std::to_string(i)));
  } else if (d.kind == "csv") {
    d.csv_path = need_string(j, where, "path");
  } else {
    throw ConfigError(where + "/kind", "expected profiles or csv");
  }
  return d;
}

EnergyConfig parse_energy(const json& j, const std::string& where) {
  expect_keys(j, where, {"f", "C_f", "eta", "eta_support", "zbar", "case"});
  EnergyConfig e;
  if (j.contains("f")) {
    const json& f = j["f"];
    const std::string fw = where + "/f";
    expect_keys(f, fw, {"type", "Q", "eps", "r", "expr"});
    e.f_type = need_string(f, fw, "type");
    if (e.f_type == "quadratic") {
      if (!f.contains("Q")) throw ConfigError(fw + "/Q", "quadratic f needs Q");
      for (const auto& row : f["Q"]) e.Q.push_back(number_list(row, fw + "/Q"));
      e.eps = opt_number(f, "eps", 0.0);
      if (f.contains("r")) e.r_expr = f["r"].get<std::string>();
    } else if (e.f_type == "expression") {
      e.f_expr = need_string(f, fw, "expr");
    } else if (e.f_type == "h") {
      // the model's own inducing potential
    } else {
      throw ConfigError(fw + "/type", "expected quadratic, expression or h");
    }
  }
  e.C_f = opt_number(j, "C_f", 1.0);
  if (j.contains("eta"))
    for (const auto& s : j["eta"]) e.eta.push_back(s.get<std::string>());
  if (j.contains("eta_support")) {
    const auto v = number_list(j["eta_support"], where + "/eta_support");
    if (v.size() != 2) throw ConfigError(where + "/eta_support", "expected [lo, hi]");
    e.eta_support_lo = v[0];
    e.eta_support_hi = v[1];
  }
  if (j.contains("zbar")) e.zbar = number_list(j["zbar"], where + "/zbar");
  if (j.contains("case")) {
    e.ref_case = j["case"].get<std::string>();
    if (e.ref_case != "A" && e.ref_case != "B")
      throw ConfigError(where + "/case", "expected A or B");
  }
  return e;
}

SamplePlan parse_plan(const json& j, const std::string& where) {
  expect_keys(j, where,
              {"scheme", "points", "per_axis", "directions", "margin", "seed",
               "direction_scale"});
  SamplePlan p;
  if (j.contains("scheme")) {
    const std::string s = j["scheme"].get<std::string>();
    if (s == "low-discrepancy")
      p.scheme = SamplePlan::Scheme::LowDiscrepancy;
    else if (s == "uniform-grid")
      p.scheme = SamplePlan::Scheme::UniformGrid;
    else
      throw ConfigError(where + "/scheme", "expected low-discrepancy or uniform-grid");
  }
  p.points = opt_int(j, "points", 2048);
  p.per_axis = opt_int(j, "per_axis", 16);
  p.directions = opt_int(j, "directions", 64);
  p.margin = opt_number(j, "margin", 1e-3);
  p.seed = static_cast<uint64_t>(opt_number(j, "seed", 1));
  p.direction_scale = opt_number(j, "direction_scale", 1.0);
  return p;
}

json space_to_json(const SpaceSpec& s) {
  json j;
  j["kind"] = s.kind;
  if (s.kind == "cuboid") {
    j["lower"] = s.lower;
    j["upper"] = s.upper;
  } else {
    j["dimension"] = s.dimension;
  }
  return j;
}

json mobility_to_json(const MobilitySpec& m) {
  json j;
  j["family"] = m.family;
  if (!m.mobility_exprs.empty()) {
    json arr = json::array();
    for (const auto& e : m.mobility_exprs) {
      json mj;
      if (e.empty()) {
        mj["type"] = "quadratic";
      } else {
        mj["type"] = "expression";
        mj["expr"] = e;
      }
      arr.push_back(mj);
    }
    j["mobilities"] = arr;
  }
  if (m.family == "perturbed-decoupled") j["epsilon"] = m.epsilon;
  if (m.dimension > 0) j["dimension"] = m.dimension;
  if (!m.h_expr.empty()) j["h"] = m.h_expr;
  j["c3_exempt"] = m.c3_exempt;
  j["derivative_mode"] = m.derivative_mode;
  j["fd_step"] = m.fd_step;
  j["interior_margin"] = m.interior_margin;
  return j;
}

json density_to_json(const DensitySpec& d) {
  json j;
  j["kind"] = d.kind;
  if (d.kind == "profiles") {
    json arr = json::array();
    for (const auto& p : d.components) {
      json pj;
      pj["family"] = p.family;
      pj["center"] = p.center;
      pj["sigma"] = p.sigma;
      pj["mass"] = p.mass;
      pj["base"] = p.base;
      pj["lo"] = p.lo;
      pj["hi"] = p.hi;
      pj["width"] = p.width;
      pj["left"] = p.left;
      pj["right"] = p.right;
      pj["value"] = p.value;
      arr.push_back(pj);
    }
    j["components"] = arr;
  } else {
    j["path"] = d.csv_path;
  }
  return j;
}

json energy_to_json(const EnergyConfig& e) {
  json j;
  json f;
  f["type"] = e.f_type;
  if (e.f_type == "quadratic") {
    f["Q"] = e.Q;
    f["eps"] = e.eps;
    if (!e.r_expr.empty()) f["r"] = e.r_expr;
  } else if (e.f_type == "expression") {
    f["expr"] = e.f_expr;
  }
  j["f"] = f;
  j["C_f"] = e.C_f;
  if (!e.eta.empty()) j["eta"] = e.eta;
  j["eta_support"] = {e.eta_support_lo, e.eta_support_hi};
  j["zbar"] = e.zbar;
  j["case"] = e.ref_case;
  return j;
}

json plan_to_json(const SamplePlan& p) {
  json j;
  j["scheme"] =
      p.scheme == SamplePlan::Scheme::LowDiscrepancy ? "low-discrepancy" : "uniform-grid";
  j["points"] = p.points;
  j["per_axis"] = p.per_axis;
  j["directions"] = p.directions;
  j["margin"] = p.margin;
  j["seed"] = p.seed;
  j["direction_scale"] = p.direction_scale;
  return j;
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path.string(), "cannot open config file");
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return parse(text);
}

RunConfig RunConfig::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError("/", std::string("json parse failure: ") + e.what());
  }
  expect_keys(j, "",
              {"space", "mobility", "grid", "discretization", "energy", "endpoints",
               "initial", "jko", "fd", "heat", "transport", "conditions", "diagnose",
               "output"});
  RunConfig c;
  if (j.contains("space")) c.space = parse_space(j["space"], "/space");
  if (j.contains("mobility")) c.mobility = parse_mobility(j["mobility"], "/mobility");
  if (j.contains("grid")) {
    const json& g = j["grid"];
    expect_keys(g, "/grid", {"x_min", "x_max", "cells"});
    Grid1D grid;
    grid.x_min = need_number(g, "/grid", "x_min");
    grid.x_max = need_number(g, "/grid", "x_max");
    grid.cells = static_cast<int>(need_number(g, "/grid", "cells"));
    if (grid.cells < 3 || grid.x_max <= grid.x_min)
      throw ConfigError("/grid", "needs cells >= 3 and x_max > x_min");
    c.grid_spec = grid;
  }
  if (j.contains("discretization")) {
    const json& d = j["discretization"];
    expect_keys(d, "/discretization",
                {"time_steps", "inner_steps", "max_iters", "rel_energy_tol",
                 "residual_tol", "solver_tol", "step_ratio", "check_every", "mass_tol"});
    c.discretization.time_steps = opt_int(d, "time_steps", 16);
    c.discretization.inner_steps = opt_int(d, "inner_steps", 4);
    c.discretization.max_iters = opt_int(d, "max_iters", 50000);
    c.discretization.rel_energy_tol = opt_number(d, "rel_energy_tol", 1e-7);
    c.discretization.residual_tol = opt_number(d, "residual_tol", 1e-12);
    c.discretization.solver_tol = opt_number(d, "solver_tol", 2e-3);
    c.discretization.step_ratio = opt_number(d, "step_ratio", 1.0);
    c.discretization.check_every = opt_int(d, "check_every", 25);
    c.discretization.mass_tol = opt_number(d, "mass_tol", 1e-8);
  }
  if (j.contains("energy")) c.energy = parse_energy(j["energy"], "/energy");
  if (j.contains("endpoints")) {
    const json& e = j["endpoints"];
    expect_keys(e, "/endpoints", {"mu0", "mu1"});
    if (!e.contains("mu0") || !e.contains("mu1"))
      throw ConfigError("/endpoints", "needs mu0 and mu1");
    c.mu0 = parse_density(e["mu0"], "/endpoints/mu0");
    c.mu1 = parse_density(e["mu1"], "/endpoints/mu1");
  }
  if (j.contains("initial")) c.initial = parse_density(j["initial"], "/initial");
  if (j.contains("jko")) {
    const json& k = j["jko"];
    expect_keys(k, "/jko", {"tau", "t_final"});
    JkoConfig kc;
    kc.tau = need_number(k, "/jko", "tau");
    kc.t_final = need_number(k, "/jko", "t_final");
    if (kc.tau <= 0 || kc.t_final <= 0) throw ConfigError("/jko", "tau, t_final > 0");
    c.jko = kc;
  }
  if (j.contains("fd")) {
    const json& f = j["fd"];
    expect_keys(f, "/fd", {"dt", "cfl_safety", "clamp_midpoints", "record_stride",
                           "t_final"});
    c.fd.dt = opt_number(f, "dt", 0.0);
    c.fd.cfl_safety = opt_number(f, "cfl_safety", 0.25);
    c.fd.clamp_midpoints = opt_bool(f, "clamp_midpoints", true);
    c.fd.record_stride = opt_int(f, "record_stride", 1);
    c.fd.t_final = opt_number(f, "t_final", 0.1);
  }
  if (j.contains("heat")) {
    const json& h = j["heat"];
    expect_keys(h, "/heat", {"t"});
    c.heat.t = need_number(h, "/heat", "t");
  }
  if (j.contains("transport")) {
    const json& t = j["transport"];
    expect_keys(t, "/transport", {"alpha", "rho", "t_final"});
    TransportConfig tc;
    tc.alpha = need_number(t, "/transport", "alpha");
    if (t.contains("rho"))
      for (const auto& s : t["rho"]) tc.rho.push_back(s.get<std::string>());
    tc.t_final = opt_number(t, "t_final", 0.1);
    c.transport = tc;
  }
  if (j.contains("conditions")) {
    const json& cc = j["conditions"];
    expect_keys(cc, "/conditions",
                {"checks", "plan", "boundary_samples", "mccann_f", "potential",
                 "diag_reference", "k_grid", "epsilon_grid"});
    ConditionsConfig cond;
    if (cc.contains("checks"))
      for (const auto& s : cc["checks"]) cond.checks.push_back(s.get<std::string>());
    if (cc.contains("plan")) cond.plan = parse_plan(cc["plan"], "/conditions/plan");
    cond.boundary_samples = opt_int(cc, "boundary_samples", 512);
    if (cc.contains("mccann_f")) {
      json wrapper;
      wrapper["f"] = cc["mccann_f"];
      cond.mccann_f = parse_energy(wrapper, "/conditions/mccann_f");
    }
    if (cc.contains("potential")) {
      const json& p = cc["potential"];
      expect_keys(p, "/conditions/potential", {"alpha", "R", "lambda"});
      cond.potential_alpha = opt_number(p, "alpha", 1.0);
      cond.potential_R = opt_number(p, "R", 1.0);
      if (p.contains("lambda")) cond.potential_lambda = p["lambda"].get<double>();
    }
    if (cc.contains("diag_reference"))
      cond.diag_reference = parse_mobility(cc["diag_reference"], "/conditions/diag_reference");
    if (cc.contains("k_grid"))
      cond.k_grid = number_list(cc["k_grid"], "/conditions/k_grid");
    if (cc.contains("epsilon_grid"))
      cond.epsilon_grid = number_list(cc["epsilon_grid"], "/conditions/epsilon_grid");
    c.conditions = cond;
  }
  if (j.contains("diagnose")) {
    const json& d = j["diagnose"];
    expect_keys(d, "/diagnose", {"run", "checks"});
    DiagnoseConfig dc;
    dc.run_dir = need_string(d, "/diagnose", "run");
    if (d.contains("checks"))
      for (const auto& s : d["checks"]) dc.checks.push_back(s.get<std::string>());
    c.diagnose = dc;
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    expect_keys(o, "/output", {"directory", "stride", "seed"});
    c.output.directory = o.contains("directory") ? o["directory"].get<std::string>()
                                                 : std::string("out");
    c.output.stride = opt_int(o, "stride", 1);
    c.output.seed = static_cast<uint64_t>(opt_number(o, "seed", 1));
  }
  return c;
}

std::string RunConfig::resolved_text() const {
  json j;
  if (space) j["space"] = space_to_json(*space);
  if (mobility) j["mobility"] = mobility_to_json(*mobility);
  if (grid_spec) {
    j["grid"] = {{"x_min", grid_spec->x_min},
                 {"x_max", grid_spec->x_max},
                 {"cells", grid_spec->cells}};
  }
  j["discretization"] = {{"time_steps", discretization.time_steps},
                         {"inner_steps", discretization.inner_steps},
                         {"max_iters", discretization.max_iters},
                         {"rel_energy_tol", discretization.rel_energy_tol},
                         {"residual_tol", discretization.residual_tol},
                         {"solver_tol", discretization.solver_tol},
                         {"step_ratio", discretization.step_ratio},
                         {"check_every", discretization.check_every},
                         {"mass_tol", discretization.mass_tol}};
  if (energy) j["energy"] = energy_to_json(*energy);
  if (mu0 && mu1)
    j["endpoints"] = {{"mu0", density_to_json(*mu0)}, {"mu1", density_to_json(*mu1)}};
  if (initial) j["initial"] = density_to_json(*initial);
  if (jko) j["jko"] = {{"tau", jko->tau}, {"t_final", jko->t_final}};
  j["fd"] = {{"dt", fd.dt},
             {"cfl_safety", fd.cfl_safety},
             {"clamp_midpoints", fd.clamp_midpoints},
             {"record_stride", fd.record_stride},
             {"t_final", fd.t_final}};
  j["heat"] = {{"t", heat.t}};
  if (transport)
    j["transport"] = {{"alpha", transport->alpha},
                      {"rho", transport->rho},
                      {"t_final", transport->t_final}};
  if (conditions) {
    json cc;
    cc["checks"] = conditions->checks;
    cc["plan"] = plan_to_json(conditions->plan);
    cc["boundary_samples"] = conditions->boundary_samples;
    if (conditions->mccann_f) cc["mccann_f"] = energy_to_json(*conditions->mccann_f)["f"];
    cc["potential"] = {{"alpha", conditions->potential_alpha},
                       {"R", conditions->potential_R}};
    if (conditions->potential_lambda)
      cc["potential"]["lambda"] = *conditions->potential_lambda;
    if (conditions->diag_reference)
      cc["diag_reference"] = mobility_to_json(*conditions->diag_reference);
    if (!conditions->k_grid.empty()) cc["k_grid"] = conditions->k_grid;
    if (!conditions->epsilon_grid.empty()) cc["epsilon_grid"] = conditions->epsilon_grid;
    j["conditions"] = cc;
  }
  if (diagnose) j["diagnose"] = {{"run", diagnose->run_dir}, {"checks", diagnose->checks}};
  j["output"] = {{"directory", output.directory},
                 {"stride", output.stride},
                 {"seed", output.seed}};
  return j.dump(2) + "\n";
}

MobilityModel RunConfig::make_model_from(const MobilitySpec& mob,
                                         const std::optional<SpaceSpec>& space) {
  auto cuboid_bounds = [&](int n) {
    Vector lo = Vector::Zero(n), hi = Vector::Ones(n);
    if (space) {
      if (space->kind != "cuboid")
        throw ConfigError("/space", "this mobility family needs a cuboid space");
      if (static_cast<int>(space->lower.size()) != n)
        throw ConfigError("/space", "space dimension does not match mobility");
      for (int i = 0; i < n; ++i) {
        lo[i] = space->lower[i];
        hi[i] = space->upper[i];
      }
    }
    return std::make_pair(lo, hi);
  };

  MobilityModel model = [&]() -> MobilityModel {
    if (mob.family == "fully-decoupled") {
      const int n = static_cast<int>(mob.mobility_exprs.size());
      if (n < 1) throw ConfigError("/mobility/mobilities", "needs at least one entry");
      auto [lo, hi] = cuboid_bounds(n);
      std::vector<ScalarMobility> ms;
      for (int jx = 0; jx < n; ++jx) {
        if (mob.mobility_exprs[jx].empty())
          ms.push_back(ScalarMobility::quadratic(lo[jx], hi[jx]));
        else
          ms.push_back(ScalarMobility::expression(Expr::parse(mob.mobility_exprs[jx]),
                                                  lo[jx], hi[jx]));
      }
      return MobilityModel::fully_decoupled(std::move(ms));
    }
    if (mob.family == "perturbed-decoupled") return MobilityModel::perturbed_decoupled(mob.epsilon);
    if (mob.family == "volume-filling") {
      int n = mob.dimension;
      if (n == 0 && space && space->kind == "simplex") n = space->dimension;
      if (n < 1) throw ConfigError("/mobility", "volume-filling needs a dimension");
      return MobilityModel::volume_filling(n);
    }
    if (mob.family == "radial-ball") {
      int n = mob.dimension;
      if (n == 0 && space && space->kind == "ball") n = space->dimension;
      if (n < 1) throw ConfigError("/mobility", "radial-ball needs a dimension");
      return MobilityModel::radial_ball(n);
    }
    if (mob.family == "induced-by-h") {
      if (!space) throw ConfigError("/mobility", "induced-by-h needs a space block");
      if (mob.h_expr.empty()) throw ConfigError("/mobility/h", "missing potential");
      StateSpace S = [&]() {
        if (space->kind == "cuboid") {
          const int n = static_cast<int>(space->lower.size());
          Vector lo(n), hi(n);
          for (int i = 0; i < n; ++i) {
            lo[i] = space->lower[i];
            hi[i] = space->upper[i];
          }
          return StateSpace::cuboid(lo, hi);
        }
        if (space->kind == "simplex") return StateSpace::simplex(space->dimension);
        return StateSpace::ball(space->dimension);
      }();
      return MobilityModel::induced_by_h(S, Expr::parse(mob.h_expr));
    }
    throw ConfigError("/mobility/family", "unknown family '" + mob.family + "'");
  }();

  model.set_c3_exempt(mob.c3_exempt);
  if (mob.derivative_mode == "finite-difference")
    model.set_derivative_mode(DerivativeMode::FiniteDifference, mob.fd_step);
  model.set_interior_margin(mob.interior_margin);
  return model;
}

MobilityModel RunConfig::make_model() const {
  if (!mobility) throw ConfigError("/mobility", "missing mobility block");
  return make_model_from(*mobility, space);
}

Grid1D RunConfig::grid() const {
  if (!grid_spec) throw ConfigError("/grid", "missing grid block");
  return *grid_spec;
}

GridDensity RunConfig::render_density(const DensitySpec& spec) const {
  if (spec.kind == "csv") return read_density_csv(spec.csv_path);
  return make_density(grid(), spec.components);
}

SolverOptions RunConfig::solver_options() const {
  SolverOptions o;
  o.time_steps = discretization.time_steps;
  o.max_iters = discretization.max_iters;
  o.rel_energy_tol = discretization.rel_energy_tol;
  o.residual_tol = discretization.residual_tol;
  o.solver_tol = discretization.solver_tol;
  o.step_ratio = discretization.step_ratio;
  o.check_every = discretization.check_every;
  o.mass_tol = discretization.mass_tol;
  return o;
}

JkoOptions RunConfig::jko_options() const {
  JkoOptions o;
  o.inner_steps = discretization.inner_steps;
  o.solver = solver_options();
  return o;
}

FdConfig RunConfig::fd_config() const {
  FdConfig f;
  f.dt = fd.dt;
  f.cfl_safety = fd.cfl_safety;
  f.clamp_midpoints = fd.clamp_midpoints;
  f.record_stride = fd.record_stride;
  return f;
}

EnergySpec RunConfig::make_energy(const MobilityModel& model,
                                  const GridDensity* mass_source) const {
  if (!energy) throw ConfigError("/energy", "missing energy block");
  const EnergyConfig& e = *energy;
  EnergySpec spec;
  const int n = model.dim();
  if (e.f_type == "quadratic") {
    Matrix Q(n, n);
    if (static_cast<int>(e.Q.size()) != n)
      throw ConfigError("/energy/f/Q", "row count does not match the model dimension");
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(e.Q[i].size()) != n)
        throw ConfigError("/energy/f/Q", "column count does not match");
      for (int jx = 0; jx < n; ++jx) Q(i, jx) = e.Q[i][jx];
    }
    spec.f = EnergyFunction::quadratic(Q, e.eps,
                                       e.r_expr.empty() ? Expr() : Expr::parse(e.r_expr));
  } else if (e.f_type == "expression") {
    spec.f = EnergyFunction::expression(Expr::parse(e.f_expr), n);
  } else {
    spec.f = EnergyFunction::model_potential();
  }
  spec.C_f = e.C_f;
  for (const auto& s : e.eta) spec.eta.push_back(Expr::parse(s));
  spec.eta_support_lo = e.eta_support_lo;
  spec.eta_support_hi = e.eta_support_hi;
  if (static_cast<int>(e.zbar.size()) != n)
    throw ConfigError("/energy/zbar", "dimension does not match the model");
  spec.zbar.resize(n);
  for (int i = 0; i < n; ++i) spec.zbar[i] = e.zbar[i];
  spec.ref_case = e.ref_case == "A" ? RefCase::A : RefCase::B;
  if (spec.ref_case == RefCase::A && mass_source) {
    spec.mass_target.resize(n);
    for (int jx = 0; jx < n; ++jx)
      spec.mass_target[jx] = mass_source->mass(jx, spec.zbar[jx]);
  }
  return spec;
}

}  // namespace mmt
