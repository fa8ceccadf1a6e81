#pragma once

#include <string>
#include <vector>

#include "mmt/grid.hpp"

namespace mmt {

/// Named per-component initial profiles. gaussian-bump and box normalize
/// their amplitude so that dx * sum (value - base) equals `mass` exactly on
/// the grid, which makes endpoint pairs of equal nominal mass exactly
/// mass-compatible under no-flux transport.
struct ProfileSpec {
  std::string family;  // gaussian-bump | box | tanh-front | constant
  double center = 0.0;
  double sigma = 0.1;    // gaussian-bump
  double mass = 1.0;     // gaussian-bump, box
  double base = 0.0;     // additive floor
  double lo = 0.0, hi = 0.0;  // box support
  double width = 0.1;    // tanh-front
  double left = 0.0, right = 0.0;  // tanh-front levels
  double value = 0.0;    // constant
};

Vector render_profile(const ProfileSpec& spec, const Grid1D& grid);

GridDensity make_density(const Grid1D& grid, const std::vector<ProfileSpec>& components);

}  // namespace mmt
