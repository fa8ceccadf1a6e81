#include "mmt/state_space.hpp"

#include <algorithm>
#include <cmath>

#include "mmt/errors.hpp"

namespace mmt {

StateSpace StateSpace::cuboid(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() == 0)
    throw InputError("cuboid: lower/upper dimension mismatch");
  if (((upper - lower).array() <= 0.0).any())
    throw InputError("cuboid: requires lower < upper componentwise");
  StateSpace s(SpaceKind::Cuboid, static_cast<int>(lower.size()));
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

StateSpace StateSpace::simplex(int dimension) {
  if (dimension < 1) throw InputError("simplex: dimension must be positive");
  return StateSpace(SpaceKind::Simplex, dimension);
}

StateSpace StateSpace::ball(int dimension) {
  if (dimension < 1) throw InputError("ball: dimension must be positive");
  return StateSpace(SpaceKind::Ball, dimension);
}

bool StateSpace::contains(const Vector& z) const {
  if (z.size() != dim_) throw InputError("contains: dimension mismatch");
  switch (kind_) {
    case SpaceKind::Cuboid:
      return (z.array() >= lower_.array()).all() &&
             (z.array() <= upper_.array()).all();
    case SpaceKind::Simplex:
      return (z.array() >= 0.0).all() && z.sum() <= 1.0;
    case SpaceKind::Ball:
      return z.norm() <= 1.0;
  }
  return false;
}

double StateSpace::interior_distance(const Vector& z) const {
  if (z.size() != dim_) throw InputError("interior_distance: dimension mismatch");
  switch (kind_) {
    case SpaceKind::Cuboid: {
      double d = (z - lower_).minCoeff();
      d = std::min(d, (upper_ - z).minCoeff());
      return d;
    }
    case SpaceKind::Simplex: {
      double d = z.minCoeff();
      d = std::min(d, (1.0 - z.sum()) / std::sqrt(static_cast<double>(dim_)));
      return d;
    }
    case SpaceKind::Ball:
      return 1.0 - z.norm();
  }
  return 0.0;
}

std::vector<Vector> StateSpace::boundary_normals(const Vector& z, double tol) const {
  if (z.size() != dim_) throw InputError("boundary_normals: dimension mismatch");
  const double din = interior_distance(z);
  if (din < -tol) throw InputError("boundary_normals: point lies outside the space");
  std::vector<Vector> normals;
  if (din > tol) return normals;  // interior point, no active face
  switch (kind_) {
    case SpaceKind::Cuboid:
      for (int j = 0; j < dim_; ++j) {
        if (z[j] - lower_[j] <= tol) {
          Vector nu = Vector::Zero(dim_);
          nu[j] = -1.0;
          normals.push_back(nu);
        }
        if (upper_[j] - z[j] <= tol) {
          Vector nu = Vector::Zero(dim_);
          nu[j] = 1.0;
          normals.push_back(nu);
        }
      }
      break;
    case SpaceKind::Simplex: {
      for (int j = 0; j < dim_; ++j) {
        if (z[j] <= tol) {
          Vector nu = Vector::Zero(dim_);
          nu[j] = -1.0;
          normals.push_back(nu);
        }
      }
      const double root_n = std::sqrt(static_cast<double>(dim_));
      if ((1.0 - z.sum()) / root_n <= tol)
        normals.push_back(Vector::Ones(dim_) / root_n);
      break;
    }
    case SpaceKind::Ball: {
      const double r = z.norm();
      if (r >= 1.0 - tol && r > 0.0) normals.push_back(z / r);
      break;
    }
  }
  return normals;
}

namespace {

// Euclidean projection onto {y >= 0, sum y <= 1}. If clamping to the
// positive orthant already satisfies the cap there is nothing left to do;
// otherwise the solution lies on the face sum y = 1 and the classical
// sort-based simplex projection applies.
Vector project_capped_simplex(const Vector& z) {
  Vector pos = z.cwiseMax(0.0);
  if (pos.sum() <= 1.0) return pos;
  const int n = static_cast<int>(z.size());
  std::vector<double> u(z.data(), z.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cssv = 0.0, theta = 0.0;
  int rho = 0;
  for (int i = 0; i < n; ++i) {
    cssv += u[i];
    const double t = (cssv - 1.0) / (i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      theta = t;
    }
  }
  (void)rho;
  return (z.array() - theta).cwiseMax(0.0);
}

}  // namespace

Vector StateSpace::project(const Vector& z) const {
  if (z.size() != dim_) throw InputError("project: dimension mismatch");
  switch (kind_) {
    case SpaceKind::Cuboid:
      return z.cwiseMax(lower_).cwiseMin(upper_);
    case SpaceKind::Simplex:
      return project_capped_simplex(z);
    case SpaceKind::Ball: {
      const double r = z.norm();
      return r <= 1.0 ? z : Vector(z / r);
    }
  }
  return z;
}

Vector StateSpace::clamp_interior(const Vector& z, double margin) const {
  if (z.size() != dim_) throw InputError("clamp_interior: dimension mismatch");
  switch (kind_) {
    case SpaceKind::Cuboid: {
      Vector lo = lower_.array() + margin;
      Vector hi = upper_.array() - margin;
      return z.cwiseMax(lo).cwiseMin(hi);
    }
    case SpaceKind::Simplex: {
      Vector y = z.cwiseMax(margin);
      const double cap = 1.0 - margin * std::sqrt(static_cast<double>(dim_));
      const double s = y.sum();
      if (s > cap) {
        // shrink toward the corner margin*e while keeping y >= margin
        const double corner = margin * dim_;
        const double t = (cap - corner) / (s - corner);
        y = (Vector::Constant(dim_, margin) + t * (y.array() - margin).matrix());
      }
      return y;
    }
    case SpaceKind::Ball: {
      const double r = z.norm();
      const double cap = 1.0 - margin;
      return r <= cap ? z : Vector(z * (cap / r));
    }
  }
  return z;
}

void StateSpace::bounding_box(Vector& lo, Vector& hi) const {
  switch (kind_) {
    case SpaceKind::Cuboid:
      lo = lower_;
      hi = upper_;
      break;
    case SpaceKind::Simplex:
      lo = Vector::Zero(dim_);
      hi = Vector::Ones(dim_);
      break;
    case SpaceKind::Ball:
      lo = Vector::Constant(dim_, -1.0);
      hi = Vector::Constant(dim_, 1.0);
      break;
  }
}

Vector StateSpace::center() const {
  switch (kind_) {
    case SpaceKind::Cuboid:
      return 0.5 * (lower_ + upper_);
    case SpaceKind::Simplex:
      return Vector::Constant(dim_, 1.0 / (dim_ + 1.0));
    case SpaceKind::Ball:
      return Vector::Zero(dim_);
  }
  return Vector::Zero(dim_);
}

bool StateSpace::operator==(const StateSpace& o) const {
  if (kind_ != o.kind_ || dim_ != o.dim_) return false;
  if (kind_ == SpaceKind::Cuboid)
    return lower_ == o.lower_ && upper_ == o.upper_;
  return true;
}

}  // namespace mmt
