#include "mmt/sampling.hpp"

#include <cmath>

#include "mmt/errors.hpp"

namespace mmt {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

struct XorShift {
  uint64_t s;
  explicit XorShift(uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  double uniform() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s % 100000007ull) / 100000007.0;
  }
  double gauss() {
    // Box-Muller
    const double u1 = std::max(uniform(), 1e-12);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
};

}  // namespace

std::vector<Vector> sample_interior(const StateSpace& space, const SamplePlan& plan) {
  if (plan.margin <= 0.0) throw InputError("sample plan: margin must be positive");
  const int n = space.dim();
  if (n > 8) throw InputError("sample plan: dimensions above 8 are unsupported");
  Vector lo, hi;
  space.bounding_box(lo, hi);
  std::vector<Vector> out;

  if (plan.scheme == SamplePlan::Scheme::UniformGrid) {
    if (plan.per_axis < 1) throw InputError("sample plan: per-axis count must be >= 1");
    std::vector<int> idx(n, 0);
    for (;;) {
      Vector z(n);
      for (int j = 0; j < n; ++j)
        z[j] = lo[j] + (hi[j] - lo[j]) * (idx[j] + 0.5) / plan.per_axis;
      if (space.interior_distance(z) >= plan.margin) out.push_back(z);
      int j = 0;
      for (; j < n; ++j) {
        if (++idx[j] < plan.per_axis) break;
        idx[j] = 0;
      }
      if (j == n) break;
    }
    if (out.empty()) throw InputError("sample plan: no grid point clears the margin");
    return out;
  }

  if (plan.points < 1) throw InputError("sample plan: point count must be >= 1");
  XorShift rng(plan.seed);
  Vector shift(n);
  for (int j = 0; j < n; ++j) shift[j] = rng.uniform();
  long attempts = 0;
  const long max_attempts = 10000L * plan.points + 1000;
  int index = 1;
  while (static_cast<int>(out.size()) < plan.points && attempts < max_attempts) {
    ++attempts;
    Vector z(n);
    for (int j = 0; j < n; ++j) {
      double u = halton(index, kPrimes[j]) + shift[j];
      u -= std::floor(u);
      z[j] = lo[j] + (hi[j] - lo[j]) * u;
    }
    ++index;
    if (space.interior_distance(z) >= plan.margin) out.push_back(z);
  }
  if (static_cast<int>(out.size()) < plan.points)
    throw InputError("sample plan: could not reach the requested point count");
  return out;
}

std::vector<Vector> sample_directions(int dim, const SamplePlan& plan) {
  const int D = std::max(1, plan.directions);
  std::vector<Vector> out;
  out.reserve(D);
  if (dim == 1) {
    for (int k = 0; k < D; ++k) {
      Vector v(1);
      v[0] = (k % 2 == 0) ? 1.0 : -1.0;
      out.push_back(v);
    }
  } else if (dim == 2) {
    for (int k = 0; k < D; ++k) {
      const double th = 2.0 * M_PI * k / D;
      Vector v(2);
      v << std::cos(th), std::sin(th);
      out.push_back(v);
    }
  } else if (dim == 3) {
    // Fibonacci sphere
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < D; ++k) {
      const double y = 1.0 - 2.0 * (k + 0.5) / D;
      const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
      const double th = golden * k;
      Vector v(3);
      v << r * std::cos(th), y, r * std::sin(th);
      out.push_back(v);
    }
  } else {
    XorShift rng(plan.seed ^ 0xabcdef12345ull);
    for (int k = 0; k < D; ++k) {
      Vector v(dim);
      for (int j = 0; j < dim; ++j) v[j] = rng.gauss();
      const double nv = v.norm();
      out.push_back(nv > 0 ? Vector(v / nv) : Vector(Vector::Unit(dim, 0)));
    }
  }
  for (auto& v : out) v *= plan.direction_scale;
  return out;
}

std::vector<Vector> sample_boundary(const StateSpace& space, int count, uint64_t seed) {
  const int n = space.dim();
  XorShift rng(seed);
  std::vector<Vector> out;
  out.reserve(count);
  switch (space.kind()) {
    case SpaceKind::Cuboid: {
      const Vector& lo = space.lower();
      const Vector& hi = space.upper();
      for (int k = 0; k < count; ++k) {
        const int face = k % (2 * n);
        const int axis = face / 2;
        Vector z(n);
        for (int j = 0; j < n; ++j) z[j] = lo[j] + (hi[j] - lo[j]) * rng.uniform();
        z[axis] = (face % 2 == 0) ? lo[axis] : hi[axis];
        out.push_back(z);
      }
      break;
    }
    case SpaceKind::Simplex: {
      for (int k = 0; k < count; ++k) {
        Vector z(n);
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
          z[j] = rng.uniform();
          sum += z[j];
        }
        const int facet = k % (n + 1);
        if (facet < n) {
          if (sum > 1.0) z *= 0.9 / sum;  // keep inside before flattening
          z[facet] = 0.0;
        } else {
          z *= 1.0 / std::max(sum, 1e-12);  // cap: sum = 1
        }
        out.push_back(z);
      }
      break;
    }
    case SpaceKind::Ball: {
      for (int k = 0; k < count; ++k) {
        Vector z(n);
        for (int j = 0; j < n; ++j) z[j] = rng.gauss();
        const double nz = z.norm();
        out.push_back(nz > 0 ? Vector(z / nz) : Vector(Vector::Unit(n, 0)));
      }
      break;
    }
  }
  return out;
}

}  // namespace mmt
