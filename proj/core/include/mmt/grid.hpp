#pragma once

#include "mmt/state_space.hpp"

namespace mmt {

/// Uniform 1D grid with N cells on [x_min, x_max]; densities live at cell
/// centers, fluxes at the N+1 faces.
struct Grid1D {
  double x_min = 0.0;
  double x_max = 1.0;
  int cells = 0;

  double dx() const { return (x_max - x_min) / cells; }
  double cell_x(int i) const { return x_min + (i + 0.5) * dx(); }
  double face_x(int i) const { return x_min + i * dx(); }

  bool operator==(const Grid1D& o) const = default;
};

/// Vector-valued density sampled at cell centers; one row per cell, one
/// column per component, every row constrained to the state space.
struct GridDensity {
  Grid1D grid;
  Matrix values;  // cells x n

  int components() const { return static_cast<int>(values.cols()); }
  int cells() const { return grid.cells; }

  /// dx * sum_i (values(i,j) - base)
  double mass(int j, double base = 0.0) const {
    return grid.dx() * (values.col(j).array() - base).sum();
  }

  /// Every value must lie in `space`; throws InputError otherwise.
  void validate(const StateSpace& space) const;
};

/// dx * sum_i x_i^2 * e'(mu_i - zbar)
double second_moment(const GridDensity& mu, const Vector& zbar);

}  // namespace mmt
