#include "mmt/mobility.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "mmt/errors.hpp"

namespace mmt {

namespace {

double xlogx(double s) { return s > 0.0 ? s * std::log(s) : 0.0; }

// adaptive Simpson on [a,b]
double simpson(const std::function<double(double)>& f, double a, double fa, double b,
               double fb, double fm, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-11) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, fa, b, fb, fm, whole, tol, 48);
}

}  // namespace

// ---------------------------------------------------------------- scalar

ScalarMobility ScalarMobility::quadratic(double lo, double hi) {
  if (!(lo < hi)) throw InputError("scalar mobility: requires lo < hi");
  ScalarMobility s;
  s.quad_ = true;
  s.lo_ = lo;
  s.hi_ = hi;
  return s;
}

ScalarMobility ScalarMobility::expression(const Expr& m, double lo, double hi) {
  if (!(lo < hi)) throw InputError("scalar mobility: requires lo < hi");
  if (m.max_z_index() > 1 || m.uses_x())
    throw InputError("scalar mobility expression must use z1 only");
  ScalarMobility s;
  s.quad_ = false;
  s.lo_ = lo;
  s.hi_ = hi;
  s.m_ = m;
  s.dm_ = m.derivative("z1");
  s.ddm_ = s.dm_.derivative("z1");
  return s;
}

double ScalarMobility::m(double s) const {
  if (quad_) return (s - lo_) * (hi_ - s) / (hi_ - lo_);
  return m_.eval_scalar(s);
}

double ScalarMobility::dm(double s) const {
  if (quad_) return ((hi_ - s) - (s - lo_)) / (hi_ - lo_);
  return dm_.eval_scalar(s);
}

double ScalarMobility::ddm(double s) const {
  if (quad_) return -2.0 / (hi_ - lo_);
  return ddm_.eval_scalar(s);
}

double ScalarMobility::h(double s) const {
  if (quad_) {
    const double w = hi_ - lo_;
    return xlogx(s - lo_) + xlogx(hi_ - s) - w * std::log(w);
  }
  const double s0 = 0.5 * (lo_ + hi_);
  auto f = [&](double u) { return (s - u) / m_.eval_scalar(u); };
  return integrate(f, s0, s);
}

double ScalarMobility::dh(double s) const {
  if (quad_) return std::log((s - lo_) / (hi_ - s));
  const double s0 = 0.5 * (lo_ + hi_);
  auto f = [&](double u) { return 1.0 / m_.eval_scalar(u); };
  return integrate(f, s0, s);
}

double ScalarMobility::c2_norm(int samples) const {
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double s = lo_ + (hi_ - lo_) * i / (samples - 1.0);
    best = std::max({best, std::abs(m(s)), std::abs(dm(s)), std::abs(ddm(s))});
  }
  return best;
}

// ----------------------------------------------------------------- model

MobilityModel MobilityModel::fully_decoupled(std::vector<ScalarMobility> mobilities) {
  const int n = static_cast<int>(mobilities.size());
  if (n < 1) throw InputError("fully decoupled: needs at least one component");
  Vector lo(n), hi(n);
  for (int j = 0; j < n; ++j) {
    lo[j] = mobilities[j].lo();
    hi[j] = mobilities[j].hi();
  }
  MobilityModel m(Family::FullyDecoupled, StateSpace::cuboid(lo, hi));
  m.mobilities_ = std::move(mobilities);
  return m;
}

MobilityModel MobilityModel::perturbed_decoupled(double epsilon) {
  if (epsilon < 0.0 || epsilon > 1.0)
    throw InputError("perturbed decoupled: epsilon must lie in [0, 1]");
  MobilityModel m(Family::PerturbedDecoupled,
                  StateSpace::cuboid(Vector::Zero(2), Vector::Ones(2)));
  m.epsilon_ = epsilon;
  return m;
}

MobilityModel MobilityModel::volume_filling(int dimension) {
  return MobilityModel(Family::VolumeFilling, StateSpace::simplex(dimension));
}

MobilityModel MobilityModel::radial_ball(int dimension) {
  return MobilityModel(Family::RadialBall, StateSpace::ball(dimension));
}

MobilityModel MobilityModel::induced_by_h(StateSpace space, const Expr& h) {
  const int n = space.dim();
  if (h.max_z_index() > n || h.uses_x())
    throw InputError("induced-by-h: potential must use z1..zn only");
  MobilityModel m(Family::InducedByH, std::move(space));
  m.h_expr_ = h;
  m.mode_ = DerivativeMode::FiniteDifference;
  for (int j = 0; j < n; ++j)
    m.h_grad_.push_back(h.derivative("z" + std::to_string(j + 1)));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      m.h_hess_.push_back(m.h_grad_[i].derivative("z" + std::to_string(j + 1)));
  return m;
}

MobilityModel& MobilityModel::set_derivative_mode(DerivativeMode m, double step) {
  if (step <= 0.0) throw InputError("derivative step must be positive");
  mode_ = m;
  fd_step_ = step;
  return *this;
}

const std::vector<ScalarMobility>& MobilityModel::scalar_mobilities() const {
  if (family_ != Family::FullyDecoupled)
    throw InputError("scalar_mobilities: model is not fully decoupled");
  return mobilities_;
}

void MobilityModel::require_in_space(const Vector& z, const char* who) const {
  if (z.size() != dim()) throw InputError(std::string(who) + ": dimension mismatch");
  if (!space_.contains(z))
    throw InputError(std::string(who) + ": point outside the state space");
}

void MobilityModel::require_interior(const Vector& z, const char* who,
                                     double margin) const {
  if (z.size() != dim()) throw InputError(std::string(who) + ": dimension mismatch");
  if (space_.interior_distance(z) < margin)
    throw DegeneratePointError(std::string(who) +
                               ": point too close to the boundary of the state space");
}

// perturbed family helpers; d_j = z_j(1-z_j), dp_j = 1-2 z_j
namespace {

struct Pert {
  double d1, d2, dp1, dp2;
  explicit Pert(const Vector& z)
      : d1(z[0] * (1.0 - z[0])),
        d2(z[1] * (1.0 - z[1])),
        dp1(1.0 - 2.0 * z[0]),
        dp2(1.0 - 2.0 * z[1]) {}
};

Matrix pert_H(const Pert& p, double eps) {
  Matrix H(2, 2);
  H(0, 0) = 1.0 / p.d1 - 2.0 * eps * p.d2;
  H(1, 1) = 1.0 / p.d2 - 2.0 * eps * p.d1;
  H(0, 1) = H(1, 0) = eps * p.dp1 * p.dp2;
  return H;
}

Matrix pert_DH(const Pert& p, double eps, const Vector& zeta) {
  Matrix D(2, 2);
  D(0, 0) = -p.dp1 * zeta[0] / (p.d1 * p.d1) - 2.0 * eps * p.dp2 * zeta[1];
  D(1, 1) = -p.dp2 * zeta[1] / (p.d2 * p.d2) - 2.0 * eps * p.dp1 * zeta[0];
  D(0, 1) = D(1, 0) = -2.0 * eps * (p.dp2 * zeta[0] + p.dp1 * zeta[1]);
  return D;
}

Matrix pert_D2H(const Pert& p, double eps, const Vector& za, const Vector& zb) {
  Matrix D(2, 2);
  D(0, 0) = 2.0 * (1.0 - 3.0 * p.d1) / (p.d1 * p.d1 * p.d1) * za[0] * zb[0] +
            4.0 * eps * za[1] * zb[1];
  D(1, 1) = 2.0 * (1.0 - 3.0 * p.d2) / (p.d2 * p.d2 * p.d2) * za[1] * zb[1] +
            4.0 * eps * za[0] * zb[0];
  D(0, 1) = D(1, 0) = 4.0 * eps * (za[0] * zb[1] + zb[0] * za[1]);
  return D;
}

}  // namespace

Matrix MobilityModel::M(const Vector& z) const {
  require_in_space(z, "eval_M");
  const int n = dim();
  switch (family_) {
    case Family::FullyDecoupled: {
      Matrix M = Matrix::Zero(n, n);
      for (int j = 0; j < n; ++j) {
        const double v = mobilities_[j].m(z[j]);
        if (!std::isfinite(v))
          throw DegeneratePointError("eval_M: scalar mobility not finite at z");
        M(j, j) = v;
      }
      return M;
    }
    case Family::PerturbedDecoupled: {
      // closed rational form, continuous up to the boundary
      const Pert p(z);
      const double e = epsilon_;
      const double dd = p.d1 * p.d2;
      const double cross = p.dp1 * p.dp2;
      const double den = 1.0 - e * dd * (4.0 - e * (4.0 * dd - cross * cross));
      Matrix B(2, 2);
      B(0, 0) = 2.0 * p.d1;
      B(1, 1) = 2.0 * p.d2;
      B(0, 1) = B(1, 0) = cross;
      Matrix M0 = Matrix::Zero(2, 2);
      M0(0, 0) = p.d1;
      M0(1, 1) = p.d2;
      return (M0 - e * dd * B) / den;
    }
    case Family::VolumeFilling: {
      Matrix M = Matrix(z.asDiagonal());
      M.noalias() -= z * z.transpose();
      return M;
    }
    case Family::RadialBall: {
      const double s = std::sqrt(std::max(0.0, 1.0 - z.squaredNorm()));
      Matrix M = (1.0 + s) * Matrix::Identity(n, n);
      M.noalias() -= z * z.transpose();
      return M;
    }
    case Family::InducedByH: {
      require_interior(z, "eval_M", interior_margin_);
      Matrix H = M_inverse(z);
      return H.ldlt().solve(Matrix::Identity(n, n));
    }
  }
  throw Error("eval_M: unreachable");
}

Matrix MobilityModel::M_inverse(const Vector& z) const {
  require_in_space(z, "eval_M_inverse");
  require_interior(z, "eval_M_inverse", interior_margin_);
  const int n = dim();
  switch (family_) {
    case Family::FullyDecoupled: {
      Matrix H = Matrix::Zero(n, n);
      for (int j = 0; j < n; ++j) H(j, j) = 1.0 / mobilities_[j].m(z[j]);
      return H;
    }
    case Family::PerturbedDecoupled:
      return pert_H(Pert(z), epsilon_);
    case Family::VolumeFilling: {
      const double rest = 1.0 - z.sum();
      Matrix H = Matrix::Constant(n, n, 1.0 / rest);
      for (int j = 0; j < n; ++j) H(j, j) += 1.0 / z[j];
      return H;
    }
    case Family::RadialBall: {
      const double s = std::sqrt(1.0 - z.squaredNorm());
      Matrix H = Matrix::Identity(n, n) / (1.0 + s);
      H.noalias() += z * z.transpose() / (s * (1.0 + s) * (1.0 + s));
      return H;
    }
    case Family::InducedByH: {
      Matrix H(n, n);
      int k = 0;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          H(i, j) = H(j, i) = h_hess_[k++].eval_z(z.data(), n);
        }
      return H;
    }
  }
  throw Error("eval_M_inverse: unreachable");
}

Matrix MobilityModel::fd_DM(const Vector& z, const Vector& zeta) const {
  const double nz = zeta.norm();
  const int n = dim();
  if (nz == 0.0) return Matrix::Zero(n, n);
  const Vector u = zeta / nz;
  double h = fd_step_ * std::max(1.0, z.norm());
  h = std::min(h, 0.45 * space_.interior_distance(z));
  return nz * (M(z + h * u) - M(z - h * u)) / (2.0 * h);
}

Matrix MobilityModel::fd_D2M_diag(const Vector& z, const Vector& zeta) const {
  const double nz = zeta.norm();
  const int n = dim();
  if (nz == 0.0) return Matrix::Zero(n, n);
  const Vector u = zeta / nz;
  double h = fd_step_ * std::max(1.0, z.norm());
  h = std::min(h, 0.45 * space_.interior_distance(z));
  return nz * nz * (M(z + h * u) - 2.0 * M(z) + M(z - h * u)) / (h * h);
}

Matrix MobilityModel::DM(const Vector& z, const Vector& zeta) const {
  require_in_space(z, "eval_DM");
  require_interior(z, "eval_DM", interior_margin_);
  if (zeta.size() != dim()) throw InputError("eval_DM: direction dimension mismatch");
  const int n = dim();
  if (mode_ == DerivativeMode::FiniteDifference || family_ == Family::InducedByH)
    return fd_DM(z, zeta);
  switch (family_) {
    case Family::FullyDecoupled: {
      Matrix D = Matrix::Zero(n, n);
      for (int j = 0; j < n; ++j) D(j, j) = mobilities_[j].dm(z[j]) * zeta[j];
      return D;
    }
    case Family::PerturbedDecoupled: {
      const Pert p(z);
      Matrix Mz = M(z);
      Matrix DH = pert_DH(p, epsilon_, zeta);
      return -Mz * DH * Mz;
    }
    case Family::VolumeFilling: {
      Matrix D = Matrix(zeta.asDiagonal());
      D.noalias() -= zeta * z.transpose();
      D.noalias() -= z * zeta.transpose();
      return D;
    }
    case Family::RadialBall: {
      const double s = std::sqrt(1.0 - z.squaredNorm());
      Matrix D = (-(z.dot(zeta)) / s) * Matrix::Identity(n, n);
      D.noalias() -= z * zeta.transpose();
      D.noalias() -= zeta * z.transpose();
      return D;
    }
    default:
      break;
  }
  throw Error("eval_DM: unreachable");
}

Matrix MobilityModel::D2M(const Vector& z, const Vector& zeta, const Vector& zeta2) const {
  require_in_space(z, "eval_D2M");
  require_interior(z, "eval_D2M", interior_margin_);
  if (zeta.size() != dim() || zeta2.size() != dim())
    throw InputError("eval_D2M: direction dimension mismatch");
  const int n = dim();
  if (mode_ == DerivativeMode::FiniteDifference || family_ == Family::InducedByH) {
    // polarization of the second difference quotient
    if (zeta.norm() == 0.0 || zeta2.norm() == 0.0) return Matrix::Zero(n, n);
    return 0.25 * (fd_D2M_diag(z, zeta + zeta2) - fd_D2M_diag(z, zeta - zeta2));
  }
  switch (family_) {
    case Family::FullyDecoupled: {
      Matrix D = Matrix::Zero(n, n);
      for (int j = 0; j < n; ++j)
        D(j, j) = mobilities_[j].ddm(z[j]) * zeta[j] * zeta2[j];
      return D;
    }
    case Family::PerturbedDecoupled: {
      const Pert p(z);
      Matrix Mz = M(z);
      Matrix DHa = pert_DH(p, epsilon_, zeta);
      Matrix DHb = pert_DH(p, epsilon_, zeta2);
      Matrix D2H = pert_D2H(p, epsilon_, zeta, zeta2);
      Matrix A = Mz * DHa * Mz * DHb * Mz;
      Matrix B = Mz * DHb * Mz * DHa * Mz;
      return A + B - Mz * D2H * Mz;
    }
    case Family::VolumeFilling: {
      Matrix D = -(zeta * zeta2.transpose());
      D.noalias() -= zeta2 * zeta.transpose();
      return D;
    }
    case Family::RadialBall: {
      const double r2 = z.squaredNorm();
      const double s = std::sqrt(1.0 - r2);
      Matrix D = (-(z.dot(zeta)) * (z.dot(zeta2)) / (s * s * s) -
                  zeta.dot(zeta2) / s) *
                 Matrix::Identity(n, n);
      D.noalias() -= zeta * zeta2.transpose();
      D.noalias() -= zeta2 * zeta.transpose();
      return D;
    }
    default:
      break;
  }
  throw Error("eval_D2M: unreachable");
}

double MobilityModel::h(const Vector& z) const {
  require_in_space(z, "eval_h");
  const int n = dim();
  switch (family_) {
    case Family::FullyDecoupled: {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += mobilities_[j].h(z[j]);
      if (!std::isfinite(acc))
        throw DegeneratePointError("eval_h: no continuous boundary extension");
      return acc;
    }
    case Family::PerturbedDecoupled: {
      const Pert p(z);
      return xlogx(z[0]) + xlogx(1.0 - z[0]) + xlogx(z[1]) + xlogx(1.0 - z[1]) +
             epsilon_ * p.d1 * p.d2;
    }
    case Family::VolumeFilling: {
      double acc = xlogx(1.0 - z.sum());
      for (int j = 0; j < n; ++j) acc += xlogx(z[j]);
      return acc;
    }
    case Family::RadialBall: {
      const double s = std::sqrt(std::max(0.0, 1.0 - z.squaredNorm()));
      return std::log(1.0 + s) - s;
    }
    case Family::InducedByH: {
      const double v = h_expr_.eval_z(z.data(), n);
      if (!std::isfinite(v))
        throw DegeneratePointError("eval_h: no continuous boundary extension");
      return v;
    }
  }
  throw Error("eval_h: unreachable");
}

Vector MobilityModel::grad_h(const Vector& z) const {
  require_interior(z, "grad_h", interior_margin_);
  const int n = dim();
  Vector g(n);
  switch (family_) {
    case Family::FullyDecoupled:
      for (int j = 0; j < n; ++j) g[j] = mobilities_[j].dh(z[j]);
      return g;
    case Family::PerturbedDecoupled: {
      const Pert p(z);
      g[0] = std::log(z[0] / (1.0 - z[0])) + epsilon_ * p.dp1 * p.d2;
      g[1] = std::log(z[1] / (1.0 - z[1])) + epsilon_ * p.dp2 * p.d1;
      return g;
    }
    case Family::VolumeFilling: {
      const double rest = 1.0 - z.sum();
      for (int j = 0; j < n; ++j) g[j] = std::log(z[j] / rest);
      return g;
    }
    case Family::RadialBall: {
      const double s = std::sqrt(1.0 - z.squaredNorm());
      return z / (1.0 + s);
    }
    case Family::InducedByH:
      for (int j = 0; j < n; ++j) g[j] = h_grad_[j].eval_z(z.data(), n);
      return g;
  }
  throw Error("grad_h: unreachable");
}

double MobilityModel::h_ref(const Vector& z, const Vector& zbar, RefCase c) const {
  if (zbar.size() != dim()) throw InputError("h_ref: reference dimension mismatch");
  switch (c) {
    case RefCase::A:
      return h(z) - h(zbar);
    case RefCase::B:
      return h(z) - h(zbar) - (z - zbar).dot(grad_h(zbar));
  }
  throw Error("h_ref: unreachable");
}

}  // namespace mmt
