#include "mmt/initial_conditions.hpp"

#include <cmath>

#include "mmt/errors.hpp"

namespace mmt {

Vector render_profile(const ProfileSpec& spec, const Grid1D& grid) {
  const int N = grid.cells;
  Vector v(N);
  if (spec.family == "gaussian-bump") {
    for (int i = 0; i < N; ++i) {
      const double x = grid.cell_x(i);
      v[i] = std::exp(-0.5 * std::pow((x - spec.center) / spec.sigma, 2));
    }
    const double raw = v.sum() * grid.dx();
    if (raw <= 0.0) throw InputError("gaussian-bump: zero discrete mass");
    v *= spec.mass / raw;
    v.array() += spec.base;
  } else if (spec.family == "box") {
    for (int i = 0; i < N; ++i) {
      const double x = grid.cell_x(i);
      v[i] = (x >= spec.lo && x <= spec.hi) ? 1.0 : 0.0;
    }
    const double raw = v.sum() * grid.dx();
    if (raw <= 0.0) throw InputError("box: support misses the grid");
    v *= spec.mass / raw;
    v.array() += spec.base;
  } else if (spec.family == "tanh-front") {
    for (int i = 0; i < N; ++i) {
      const double x = grid.cell_x(i);
      const double s = 0.5 * (1.0 + std::tanh((x - spec.center) / spec.width));
      v[i] = spec.left + (spec.right - spec.left) * s;
    }
  } else if (spec.family == "constant") {
    v.setConstant(spec.value);
  } else {
    throw InputError("unknown profile family '" + spec.family + "'");
  }
  return v;
}

GridDensity make_density(const Grid1D& grid, const std::vector<ProfileSpec>& components) {
  if (components.empty()) throw InputError("make_density: no components");
  GridDensity mu;
  mu.grid = grid;
  mu.values.resize(grid.cells, static_cast<int>(components.size()));
  for (size_t j = 0; j < components.size(); ++j)
    mu.values.col(static_cast<int>(j)) = render_profile(components[j], grid);
  return mu;
}

}  // namespace mmt
