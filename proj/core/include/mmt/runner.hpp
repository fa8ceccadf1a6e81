#pragma once

#include <filesystem>
#include <ostream>

#include "mmt/diagnostics.hpp"
#include "mmt/run_config.hpp"

namespace mmt {

/// Workflow entry points behind the CLI subcommands. Every run writes the
/// fully resolved configuration next to its outputs and lands files
/// atomically. Return values are process exit codes (0 success; the
/// condition checker returns 0/1/2 for pass/inconclusive/fail, diagnose
/// returns 1 when a selected check fails).
int run_distance(const RunConfig& cfg, const std::filesystem::path& outdir,
                 bool write_geodesic, std::ostream& log);
int run_jko(const RunConfig& cfg, const std::filesystem::path& outdir, std::ostream& log);
int run_fd(const RunConfig& cfg, const std::filesystem::path& outdir, std::ostream& log);
int run_heat(const RunConfig& cfg, const std::filesystem::path& outdir, std::ostream& log);
int run_transport(const RunConfig& cfg, const std::filesystem::path& outdir,
                  std::ostream& log);
int run_compare(const RunConfig& cfg, const std::filesystem::path& outdir,
                std::ostream& log);
int run_check_conditions(const RunConfig& cfg, const std::filesystem::path& outdir,
                         std::ostream& log);
int run_diagnose(const RunConfig& cfg, const std::filesystem::path& outdir,
                 std::ostream& log);

/// Re-ingestion of recorded runs (used by diagnose; requires snapshot
/// stride 1 for JKO runs).
JkoTrajectory load_jko_run(const std::filesystem::path& dir, const MobilityModel& model,
                           const EnergySpec& spec);
FdTrajectory load_fd_run(const std::filesystem::path& dir);

void write_geodesic_csv(const std::filesystem::path& path, const TransportPath& path_data);

}  // namespace mmt
