#include <doctest.h>

#include "mmt/errors.hpp"
#include "mmt/state_space.hpp"

using namespace mmt;

namespace {
Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("membership is closed with tolerance zero") {
  auto cube = StateSpace::cuboid(Vector::Zero(2), Vector::Ones(2));
  CHECK(cube.contains(vec2(0.5, 0.5)));
  CHECK(cube.contains(vec2(0.0, 1.0)));
  CHECK_FALSE(cube.contains(vec2(-1e-16, 0.5)));

  auto simplex = StateSpace::simplex(2);
  CHECK_FALSE(simplex.contains(vec2(0.6, 0.6)));  // sum > 1
  CHECK(simplex.contains(vec2(0.5, 0.5)));

  auto ball = StateSpace::ball(2);
  CHECK(ball.contains(vec2(1.0, 0.0)));  // boundary included
  CHECK_FALSE(ball.contains(vec2(1.0 + 1e-12, 0.0)));

  CHECK_THROWS_AS(cube.contains(Vector::Zero(3)), InputError);
}

TEST_CASE("interior distance sign") {
  auto cube = StateSpace::cuboid(Vector::Zero(2), Vector::Ones(2));
  CHECK(cube.interior_distance(vec2(0.5, 0.5)) == doctest::Approx(0.5));
  CHECK(cube.interior_distance(vec2(0.0, 0.5)) == 0.0);
  CHECK(cube.interior_distance(vec2(-0.1, 0.5)) < 0.0);

  auto ball = StateSpace::ball(2);
  CHECK(ball.interior_distance(Vector::Zero(2)) == doctest::Approx(1.0));
}

TEST_CASE("boundary normals of active faces") {
  auto cube = StateSpace::cuboid(Vector::Zero(2), Vector::Ones(2));
  auto n1 = cube.boundary_normals(vec2(0.0, 0.5), 1e-9);
  REQUIRE(n1.size() == 1);
  CHECK(n1[0] == vec2(-1.0, 0.0));

  auto simplex = StateSpace::simplex(2);
  auto n2 = simplex.boundary_normals(vec2(0.5, 0.5), 1e-9);
  REQUIRE(n2.size() == 1);
  CHECK(n2[0].isApprox(vec2(1.0, 1.0) / std::sqrt(2.0)));

  auto ball = StateSpace::ball(2);
  auto n3 = ball.boundary_normals(vec2(0.6, 0.8), 1e-9);
  REQUIRE(n3.size() == 1);
  CHECK(n3[0].isApprox(vec2(0.6, 0.8)));

  // interior point: empty; far outside: error
  CHECK(cube.boundary_normals(vec2(0.5, 0.5), 1e-9).empty());
  CHECK_THROWS_AS(cube.boundary_normals(vec2(2.0, 0.5), 1e-9), InputError);

  // corner carries both face normals
  CHECK(cube.boundary_normals(vec2(0.0, 0.0), 1e-9).size() == 2);
}

TEST_CASE("projection lands inside and is idempotent") {
  auto simplex = StateSpace::simplex(3);
  Vector z(3);
  z << 0.9, 0.8, -0.3;
  Vector p = simplex.project(z);
  CHECK(simplex.contains(p));
  CHECK(simplex.project(p).isApprox(p));

  auto ball = StateSpace::ball(2);
  CHECK(ball.project(vec2(3.0, 4.0)).isApprox(vec2(0.6, 0.8)));
}

TEST_CASE("interior clamp keeps the margin") {
  auto simplex = StateSpace::simplex(2);
  Vector z = simplex.clamp_interior(vec2(1.0, 0.0), 1e-3);
  CHECK(simplex.interior_distance(z) >= 1e-3 * (1.0 - 1e-9));

  auto cube = StateSpace::cuboid(Vector::Zero(1), Vector::Ones(1));
  Vector s = cube.clamp_interior(Vector::Zero(1), 1e-6);
  CHECK(s[0] == doctest::Approx(1e-6));
}
