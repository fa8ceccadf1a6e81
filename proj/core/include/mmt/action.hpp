#pragma once

#include "mmt/grid.hpp"
#include "mmt/mobility.hpp"

namespace mmt {

struct TransportPath;

/// Tolerances controlling the boundary (lower-semicontinuous) extension of
/// the action density and the finite stand-in for +infinity used inside
/// optimization objectives.
struct ActionConfig {
  double singular_eig_tol = 1e-10;
  double range_residual_tol = 1e-8;
  double infinity_surrogate = 1e12;
};

/// Action density phi(z, p) = p' M(z)^{-1} p extended to the boundary by
/// spectral projection: eigenvalues of M(z) below singular_eig_tol span the
/// degenerate space; a flux component there beyond range_residual_tol*|p|
/// yields +infinity, otherwise the pseudo-inverse quadratic form.
/// Returns +infinity as std::numeric_limits<double>::infinity().
double action_density(const MobilityModel& model, const Vector& z, const Vector& p,
                      const ActionConfig& cfg = {});

/// Spatial action functional: face-quadrature sum of phi(mu at face, w at
/// face) with mu averaged to faces (arithmetic mean of the adjacent cells,
/// clamped to S) and half weights on the two boundary faces. w has one row
/// per face (cells+1 rows).
double action_functional(const MobilityModel& model, const GridDensity& mu,
                         const Matrix& w, const ActionConfig& cfg = {});

/// Time-staggered path energy: dt * sum_k Phi((mu^k + mu^{k+1})/2, w^{k+1/2}).
double path_energy(const MobilityModel& model, const TransportPath& path,
                   const ActionConfig& cfg = {});

/// Per-slice action values Phi_k, length K; path_energy = dt * sum.
Vector per_slice_action(const MobilityModel& model, const TransportPath& path,
                        const ActionConfig& cfg = {});

}  // namespace mmt
