#include <doctest.h>

#include <cmath>
#include <random>

#include "mmt/errors.hpp"
#include "mmt/mobility.hpp"
#include "mmt/sampling.hpp"

using namespace mmt;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

std::vector<MobilityModel> builtin_models() {
  std::vector<MobilityModel> models;
  models.push_back(MobilityModel::fully_decoupled(
      {ScalarMobility::quadratic(0.0, 1.0), ScalarMobility::quadratic(0.0, 1.0)}));
  models.push_back(MobilityModel::perturbed_decoupled(0.1));
  models.push_back(MobilityModel::volume_filling(2));
  models.push_back(MobilityModel::volume_filling(3));
  models.push_back(MobilityModel::radial_ball(2));
  models.push_back(MobilityModel::radial_ball(3));
  return models;
}

}  // namespace

TEST_CASE("volume-filling closed forms") {
  auto model = MobilityModel::volume_filling(2);
  Matrix M = model.M(vec2(0.25, 0.25));
  CHECK(M(0, 0) == doctest::Approx(0.1875).epsilon(1e-14));
  CHECK(M(0, 1) == doctest::Approx(-0.0625).epsilon(1e-14));
  CHECK(M(1, 0) == doctest::Approx(-0.0625).epsilon(1e-14));
  CHECK(M(1, 1) == doctest::Approx(0.1875).epsilon(1e-14));

  // the all-ones normal of the cap facet is annihilated on the boundary
  Vector e = Vector::Ones(2);
  CHECK((model.M(vec2(1.0, 0.0)) * e).norm() <= 1e-14);

  Matrix H = model.M_inverse(vec2(0.25, 0.25));
  CHECK(H(0, 0) == doctest::Approx(1.0 / 0.25 + 2.0));
  CHECK(H(0, 1) == doctest::Approx(2.0));
  CHECK(H(1, 1) == doctest::Approx(6.0));

  // D2M = -2 zeta zeta' for every state and direction
  Vector zeta = vec2(0.3, -1.2);
  Matrix D2 = model.D2M(vec2(0.2, 0.3), zeta, zeta);
  CHECK((D2 + 2.0 * zeta * zeta.transpose()).norm() <= 1e-14);
}

TEST_CASE("radial-ball closed forms") {
  auto model = MobilityModel::radial_ball(2);
  CHECK((model.M(Vector::Zero(2)) - 2.0 * Matrix::Identity(2, 2)).norm() <= 1e-14);

  // D2M at the center along e1; at z = 0 the radial term vanishes, leaving
  // -2 zeta zeta' - |zeta|^2 I
  Matrix D2 = model.D2M(Vector::Zero(2), vec2(1.0, 0.0), vec2(1.0, 0.0));
  CHECK(D2(0, 0) == doctest::Approx(-3.0));
  CHECK(D2(1, 1) == doctest::Approx(-1.0));
  CHECK(std::abs(D2(0, 1)) <= 1e-14);

  // boundary flux annihilation: M(z) z = 0 at |z| = 1
  Vector z = vec2(0.6, 0.8);
  CHECK((model.M(z) * z).norm() <= 1e-14);
}

TEST_CASE("fully decoupled inverse and potential") {
  auto model = MobilityModel::fully_decoupled(
      {ScalarMobility::quadratic(0.0, 1.0), ScalarMobility::quadratic(0.0, 1.0)});
  Matrix H = model.M_inverse(vec2(0.5, 0.5));
  CHECK(H(0, 0) == doctest::Approx(4.0));
  CHECK(H(1, 1) == doctest::Approx(4.0));
  CHECK(H(0, 1) == 0.0);

  // paradigmatic h: zero at the interval ends, -log 2 at the midpoint
  const auto& m = model.scalar_mobilities()[0];
  CHECK(m.h(0.0) == doctest::Approx(0.0));
  CHECK(m.h(1.0) == doctest::Approx(0.0));
  CHECK(m.h(0.5) == doctest::Approx(-std::log(2.0)));

  // case B reference value vanishes at the reference state
  CHECK(model.h_ref(vec2(0.3, 0.7), vec2(0.3, 0.7), RefCase::B) == doctest::Approx(0.0));
  CHECK(model.h_ref(vec2(0.2, 0.6), vec2(0.5, 0.5), RefCase::B) > 0.0);
}

TEST_CASE("perturbed family reduces to the decoupled one at epsilon = 0") {
  auto pert = MobilityModel::perturbed_decoupled(0.0);
  auto dec = MobilityModel::fully_decoupled(
      {ScalarMobility::quadratic(0.0, 1.0), ScalarMobility::quadratic(0.0, 1.0)});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vector z = vec2(u(rng), u(rng));
    CHECK((pert.M(z) - dec.M(z)).cwiseAbs().maxCoeff() <= 1e-12);
    if (pert.space().interior_distance(z) > 1e-3)
      CHECK((pert.M_inverse(z) - dec.M_inverse(z)).cwiseAbs().maxCoeff() <=
            1e-12 * (1.0 + dec.M_inverse(z).cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("DM is linear in the direction and vanishes at zero") {
  for (const auto& model : builtin_models()) {
    const int n = model.dim();
    Vector z = model.space().clamp_interior(model.space().center(), 1e-3);
    CHECK(model.DM(z, Vector::Zero(n)).norm() == 0.0);
    Vector zeta = Vector::LinSpaced(n, 0.3, 1.1);
    CHECK((model.DM(z, 2.0 * zeta) - 2.0 * model.DM(z, zeta)).norm() <= 1e-12);
  }
}

TEST_CASE("symmetry of M, DM, D2M on random interior states") {
  SamplePlan plan;
  plan.points = 1000;
  plan.margin = 1e-6;
  for (const auto& model : builtin_models()) {
    auto pts = sample_interior(model.space(), plan);
    auto dirs = sample_directions(model.dim(), plan);
    for (size_t i = 0; i < pts.size(); ++i) {
      const Matrix M = model.M(pts[i]);
      CHECK((M - M.transpose()).norm() <= 1e-12 * (1.0 + M.norm()));
      if (i % 97 == 0) {
        const auto& zeta = dirs[i % dirs.size()];
        const auto& zeta2 = dirs[(i + 13) % dirs.size()];
        const Matrix D = model.DM(pts[i], zeta);
        CHECK((D - D.transpose()).norm() <= 1e-10 * (1.0 + D.norm()));
        const Matrix D2 = model.D2M(pts[i], zeta, zeta2);
        CHECK((D2 - D2.transpose()).norm() <= 1e-10 * (1.0 + D2.norm()));
      }
    }
  }
}

TEST_CASE("inverse consistency: M times hess h is the identity") {
  SamplePlan plan;
  plan.points = 200;
  plan.margin = 1e-4;
  for (const auto& model : builtin_models()) {
    auto pts = sample_interior(model.space(), plan);
    const Matrix I = Matrix::Identity(model.dim(), model.dim());
    for (const auto& z : pts)
      CHECK((model.M(z) * model.M_inverse(z) - I).norm() <= 1e-8);
  }
}

TEST_CASE("analytic derivatives agree with central differences") {
  SamplePlan plan;
  plan.points = 40;
  plan.margin = 1e-2;
  plan.directions = 8;
  for (auto& model : builtin_models()) {
    auto pts = sample_interior(model.space(), plan);
    auto dirs = sample_directions(model.dim(), plan);
    MobilityModel fd = model;
    fd.set_derivative_mode(DerivativeMode::FiniteDifference, 1e-5);
    for (size_t i = 0; i < pts.size(); ++i) {
      const auto& z = pts[i];
      const auto& zeta = dirs[i % dirs.size()];
      const Matrix Da = model.DM(z, zeta);
      const Matrix Df = fd.DM(z, zeta);
      CHECK((Da - Df).norm() <= 1e-4 * (1.0 + Da.norm()));
      const Matrix D2a = model.D2M(z, zeta, zeta);
      const Matrix D2f = fd.D2M(z, zeta, zeta);
      CHECK((D2a - D2f).norm() <= 1e-4 * (1.0 + D2a.norm()));
    }
  }
}

TEST_CASE("boundary degeneracy: M annihilates outward normals") {
  for (const auto& model : builtin_models()) {
    auto pts = sample_boundary(model.space(), 200, 3);
    for (const auto& z : pts)
      for (const auto& nu : model.space().boundary_normals(z, 1e-12))
        CHECK((model.M(z) * nu).norm() <= 1e-10 * (1.0 + model.M(z).norm()));
  }
}

TEST_CASE("linear mobility is c3-exempt plumbing") {
  auto model = MobilityModel::fully_decoupled(
      {ScalarMobility::expression(Expr::parse("z1"), 0.0, 1.0)});
  model.set_c3_exempt(true);
  CHECK(model.c3_exempt());
  Vector one = Vector::Ones(1);
  CHECK((model.M(one) * one).norm() == doctest::Approx(1.0));  // m(1) = 1 != 0
}

TEST_CASE("evaluation guards") {
  auto model = MobilityModel::volume_filling(2);
  CHECK_THROWS_AS(model.M(vec2(0.7, 0.7)), InputError);            // outside S
  CHECK_THROWS_AS(model.M_inverse(vec2(0.0, 0.5)), DegeneratePointError);
  CHECK_THROWS_AS(model.DM(vec2(1.0, 0.0), vec2(1, 0)), DegeneratePointError);

  auto induced = MobilityModel::induced_by_h(
      StateSpace::cuboid(Vector::Zero(2), Vector::Ones(2)), Expr::parse("z1*z2"));
  CHECK_THROWS_AS(induced.M(vec2(0.0, 0.5)), DegeneratePointError);
}

TEST_CASE("induced-by-h evaluates the expression Hessian") {
  // h = z1^2 + z1 z2 + z2^2 has constant Hessian [[2,1],[1,2]]
  auto model = MobilityModel::induced_by_h(
      StateSpace::cuboid(Vector::Zero(2), Vector::Ones(2)),
      Expr::parse("z1^2 + z1*z2 + z2^2"));
  Matrix H = model.M_inverse(vec2(0.4, 0.6));
  CHECK(H(0, 0) == doctest::Approx(2.0));
  CHECK(H(0, 1) == doctest::Approx(1.0));
  Matrix M = model.M(vec2(0.4, 0.6));
  CHECK((M * H - Matrix::Identity(2, 2)).norm() <= 1e-10);
}
