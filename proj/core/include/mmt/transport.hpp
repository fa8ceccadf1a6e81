#pragma once

#include <optional>
#include <vector>

#include "mmt/action.hpp"
#include "mmt/grid.hpp"
#include "mmt/mobility.hpp"

namespace mmt {

/// Staggered space-time curve: densities mu^0..mu^K at integer time slices
/// and cell centers, fluxes w^{k+1/2} at half-integer slices and faces.
/// Boundary faces carry zero flux (no-flux domain truncation), so the mass
/// of every component is conserved across slices.
struct TransportPath {
  Grid1D grid;
  double duration = 1.0;
  std::vector<Matrix> densities;  // K+1 matrices, cells x n
  std::vector<Matrix> fluxes;     // K matrices, (cells+1) x n, rows 0 and N zero
  std::optional<std::vector<Matrix>> dual_potential;  // K matrices, cells x n

  int steps() const { return static_cast<int>(fluxes.size()); }
  int cells() const { return grid.cells; }
  int components() const {
    return densities.empty() ? 0 : static_cast<int>(densities.front().cols());
  }
  double dt() const { return duration / steps(); }

  GridDensity slice(int k) const { return GridDensity{grid, densities.at(k)}; }
};

/// Exact max-norm residual of the discrete continuity equation
/// (mu^{k+1}-mu^k)/dt + (w_{i+1}-w_i)/dx = 0 over all cells and slices.
double continuity_residual(const TransportPath& path);

/// Linear interpolation between the endpoints with the unique compatible
/// flux (cumulative sums); requires equal per-component masses.
TransportPath linear_interpolation_path(const GridDensity& mu0, const GridDensity& mu1,
                                        int steps);

/// Concatenation in time; terminal slice of a must equal initial slice of b.
TransportPath concatenate(const TransportPath& a, const TransportPath& b);

/// Linear time rescaling to a new duration: fluxes scale by T/T'.
TransportPath rescale(const TransportPath& path, double new_duration);

/// Rescaling by a monotone node map sigma: node_of_old[k] is the index of the
/// old time node carried to new node k (strictly increasing, first 0, last K).
/// New fluxes are the time averages of the spanned old fluxes, which keeps
/// the discrete continuity equation exact.
TransportPath rescale(const TransportPath& path, const std::vector<int>& node_of_old,
                      double new_duration);

TransportPath time_reverse(const TransportPath& path);

/// First-order primal-dual solver options for distance/geodesic problems.
struct SolverOptions {
  int time_steps = 16;       // K
  int max_iters = 50000;
  double rel_energy_tol = 1e-7;   // relative energy change between checks
  double residual_tol = 1e-12;    // continuity residual
  double solver_tol = 2e-3;       // distance-scale tolerance quoted by checks
  int check_every = 25;
  double step_ratio = 1.0;        // sigma/tau balance
  double mass_tol = 1e-8;
  bool allow_mollify = true;      // one discrete heat step on stalled endpoints
  int min_iters = 10;
};

struct GeodesicResult {
  double distance = 0.0;
  TransportPath path;
  Vector per_slice_action;
  int iterations = 0;
  bool converged = false;
  double primal_dual_gap = 0.0;
  double continuity_residual = 0.0;
  bool mollified_endpoints = false;
  double interior_lift = 0.0;  // theta of the interior blend applied at scoring
};

/// W_M between two grid densities by convex optimization over discrete
/// curves with fixed endpoints; distance = sqrt(minimal path energy).
GeodesicResult solve_distance(const MobilityModel& model, const GridDensity& mu0,
                              const GridDensity& mu1, const SolverOptions& opts = {},
                              const ActionConfig& cfg = {});

/// 1D L2 Wasserstein distance of two equal-mass scalar densities through
/// piecewise-linear inverse CDFs, in the unnormalized convention
/// (integral of |x-y|^2 d nu, so translation by d costs sqrt(mass)*|d|).
double quantile_w2(const GridDensity& nu0, const GridDensity& nu1, int quantiles = 4096);

}  // namespace mmt
