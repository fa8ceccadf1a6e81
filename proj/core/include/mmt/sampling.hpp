#pragma once

#include <cstdint>
#include <vector>

#include "mmt/state_space.hpp"

namespace mmt {

/// Deterministic sampling plan for condition checks.
struct SamplePlan {
  enum class Scheme { UniformGrid, LowDiscrepancy };
  Scheme scheme = Scheme::LowDiscrepancy;
  int points = 2048;  // LowDiscrepancy target count
  int per_axis = 16;  // UniformGrid per-axis count
  int directions = 64;
  double margin = 1e-3;  // minimum interior distance of sampled states
  uint64_t seed = 1;
  double direction_scale = 1.0;
};

/// Interior states with interior_distance >= margin. Halton points with a
/// seeded rotation (LowDiscrepancy) or a tensor grid (UniformGrid), both
/// filtered by membership.
std::vector<Vector> sample_interior(const StateSpace& space, const SamplePlan& plan);

/// Direction set: signs for n=1, a uniform angle grid for n=2, a Fibonacci
/// sphere for n=3, seeded unit Gaussians beyond; scaled by direction_scale.
std::vector<Vector> sample_directions(int dim, const SamplePlan& plan);

/// Boundary states (faces, facets and cap, or the unit sphere).
std::vector<Vector> sample_boundary(const StateSpace& space, int count, uint64_t seed);

}  // namespace mmt
