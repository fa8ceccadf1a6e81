// mmt: transport distances, geodesics, minimizing-movement runs, and
// finite-difference oracles for vector-valued densities with matrix
// mobilities, driven by one JSON configuration document per run.
//
//   mmt distance --config run.json
//   mmt jko --config run.json --tau 0.0125
//   mmt check-conditions --config run.json
//
// Exit codes: 0 success, 64 configuration error, 65 numerical failure;
// check-conditions returns 0/1/2 for pass/inconclusive/fail and diagnose
// returns 1 when a selected check fails.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "mmt/errors.hpp"
#include "mmt/parallel.hpp"
#include "mmt/runner.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string output_override;
  int threads = 1;
  double tau = 0.0;
  double t_final = 0.0;
  long seed = -1;
};

fs::path resolve_outdir(const mmt::RunConfig& cfg, const CommonArgs& args) {
  fs::path dir = args.output_override.empty() ? fs::path(cfg.output.directory)
                                              : fs::path(args.output_override);
  if (dir.is_relative()) {
    if (const char* base = std::getenv("MMT_OUTPUT_DIR")) dir = fs::path(base) / dir;
  }
  return dir;
}

mmt::RunConfig load_config(const CommonArgs& args) {
  mmt::RunConfig cfg = mmt::RunConfig::load(args.config_path);
  // flags override scalar fields only
  if (args.tau > 0.0 && cfg.jko) cfg.jko->tau = args.tau;
  if (args.t_final > 0.0 && cfg.jko) cfg.jko->t_final = args.t_final;
  if (args.seed >= 0) cfg.output.seed = static_cast<uint64_t>(args.seed);
  if (!args.output_override.empty()) cfg.output.directory = args.output_override;
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool with_jko_flags = false) {
  cmd->add_option("--config", args.config_path, "run configuration document")
      ->required();
  cmd->add_option("--output", args.output_override, "output directory override");
  cmd->add_option("--threads", args.threads, "worker thread cap");
  cmd->add_option("--seed", args.seed, "seed override");
  if (with_jko_flags) {
    cmd->add_option("--tau", args.tau, "step size override");
    cmd->add_option("--t-final", args.t_final, "final time override");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transport distances and gradient-flow solvers for matrix mobilities"};
  app.require_subcommand(1);

  CommonArgs args;
  enum class Cmd {
    CheckConditions,
    Distance,
    Geodesic,
    Jko,
    FdSolve,
    Heat,
    TransportSolve,
    Compare,
    Diagnose,
  };
  Cmd selected = Cmd::Distance;

  auto* c1 = app.add_subcommand("check-conditions", "certify structural conditions");
  c1->callback([&] { selected = Cmd::CheckConditions; });
  add_common(c1, args);
  auto* c2 = app.add_subcommand("distance", "W_M between two endpoint densities");
  c2->callback([&] { selected = Cmd::Distance; });
  add_common(c2, args);
  auto* c3 = app.add_subcommand("geodesic", "distance plus exported geodesic");
  c3->callback([&] { selected = Cmd::Geodesic; });
  add_common(c3, args);
  auto* c4 = app.add_subcommand("jko", "minimizing-movement trajectory");
  c4->callback([&] { selected = Cmd::Jko; });
  add_common(c4, args, true);
  auto* c5 = app.add_subcommand("fd-solve", "explicit drift-diffusion oracle");
  c5->callback([&] { selected = Cmd::FdSolve; });
  add_common(c5, args);
  auto* c6 = app.add_subcommand("heat", "heat-kernel convolution");
  c6->callback([&] { selected = Cmd::Heat; });
  add_common(c6, args);
  auto* c7 = app.add_subcommand("transport-solve", "regularized transport oracle");
  c7->callback([&] { selected = Cmd::TransportSolve; });
  add_common(c7, args);
  auto* c8 = app.add_subcommand("compare", "JKO vs finite differences");
  c8->callback([&] { selected = Cmd::Compare; });
  add_common(c8, args, true);
  auto* c9 = app.add_subcommand("diagnose", "estimate suite over a recorded run");
  c9->callback([&] { selected = Cmd::Diagnose; });
  add_common(c9, args);

  CLI11_PARSE(app, argc, argv);

  try {
    mmt::set_worker_cap(args.threads);
    mmt::RunConfig cfg = load_config(args);
    const fs::path outdir = resolve_outdir(cfg, args);
    switch (selected) {
      case Cmd::CheckConditions:
        return mmt::run_check_conditions(cfg, outdir, std::cout);
      case Cmd::Distance:
        return mmt::run_distance(cfg, outdir, false, std::cout);
      case Cmd::Geodesic:
        return mmt::run_distance(cfg, outdir, true, std::cout);
      case Cmd::Jko:
        return mmt::run_jko(cfg, outdir, std::cout);
      case Cmd::FdSolve:
        return mmt::run_fd(cfg, outdir, std::cout);
      case Cmd::Heat:
        return mmt::run_heat(cfg, outdir, std::cout);
      case Cmd::TransportSolve:
        return mmt::run_transport(cfg, outdir, std::cout);
      case Cmd::Compare:
        return mmt::run_compare(cfg, outdir, std::cout);
      case Cmd::Diagnose:
        return mmt::run_diagnose(cfg, outdir, std::cout);
    }
  } catch (const mmt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 64;
  } catch (const mmt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 65;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 65;
  }
  return 0;
}
