#include "mmt/grid.hpp"

#include "mmt/errors.hpp"

namespace mmt {

void GridDensity::validate(const StateSpace& space) const {
  if (grid.cells <= 0 || grid.x_max <= grid.x_min)
    throw InputError("grid density: degenerate grid");
  if (values.rows() != grid.cells)
    throw InputError("grid density: value rows do not match cell count");
  if (components() != space.dim())
    throw InputError("grid density: component count does not match state space");
  for (int i = 0; i < grid.cells; ++i) {
    if (!space.contains(values.row(i).transpose()))
      throw InputError("grid density: value outside the state space at cell " +
                       std::to_string(i));
  }
}

double second_moment(const GridDensity& mu, const Vector& zbar) {
  if (zbar.size() != mu.components())
    throw InputError("second_moment: reference dimension mismatch");
  double acc = 0.0;
  for (int i = 0; i < mu.cells(); ++i) {
    const double x = mu.grid.cell_x(i);
    acc += x * x * (mu.values.row(i).transpose() - zbar).sum();
  }
  return acc * mu.grid.dx();
}

}  // namespace mmt
