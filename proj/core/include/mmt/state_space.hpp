#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mmt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class SpaceKind { Cuboid, Simplex, Ball };

/// Compact convex state space S in which density values live.
/// Three shapes are supported: an n-cuboid [lower, upper], the standard
/// n-simplex {z >= 0, sum z <= 1}, and the closed unit ball.
class StateSpace {
 public:
  static StateSpace cuboid(Vector lower, Vector upper);
  static StateSpace simplex(int dimension);
  static StateSpace ball(int dimension);

  SpaceKind kind() const { return kind_; }
  int dim() const { return dim_; }

  /// Closed-set membership with tolerance zero.
  bool contains(const Vector& z) const;

  /// Signed measure of how far z sits inside S: positive iff z is in the
  /// interior, zero on the boundary, negative outside. For the cuboid and
  /// the simplex facets this is the distance to the nearest constraint.
  double interior_distance(const Vector& z) const;

  /// Outward unit normals of all constraints active within tol at z.
  /// Empty when z is interior (beyond tol); throws InputError when z lies
  /// outside S by more than tol.
  std::vector<Vector> boundary_normals(const Vector& z, double tol) const;

  /// Euclidean projection onto S.
  Vector project(const Vector& z) const;

  /// Projection onto the margin-shrunk interior; used by solvers that must
  /// keep iterates strictly inside S.
  Vector clamp_interior(const Vector& z, double margin) const;

  /// Axis-aligned bounding box, used by samplers.
  void bounding_box(Vector& lo, Vector& hi) const;

  /// A canonical interior point (cuboid/simplex barycenter, ball center).
  Vector center() const;

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  bool operator==(const StateSpace& o) const;

 private:
  StateSpace(SpaceKind k, int d) : kind_(k), dim_(d) {}
  SpaceKind kind_;
  int dim_;
  Vector lower_, upper_;  // cuboid only
};

}  // namespace mmt
