#pragma once

#include <optional>
#include <vector>

#include "mmt/expression.hpp"
#include "mmt/state_space.hpp"

namespace mmt {

enum class DerivativeMode { Analytic, FiniteDifference };

/// Reference-state regime: A anchors at the lower corner of a cuboid with
/// fixed mass, B at an interior state with finite L2 deviation.
enum class RefCase { A, B };

/// Scalar mobility m on an interval [lo, hi]: positive and concave inside,
/// together with a second primitive h of 1/m.
class ScalarMobility {
 public:
  /// m(s) = (s - lo)(hi - s)/(hi - lo); h has the closed log form with
  /// h(lo) = h(hi) = 0.
  static ScalarMobility quadratic(double lo, double hi);

  /// User expression in z1. h is produced by quadrature of the Cauchy
  /// repeated-integral formula anchored at the interval midpoint.
  static ScalarMobility expression(const Expr& m, double lo, double hi);

  double m(double s) const;
  double dm(double s) const;
  double ddm(double s) const;
  double h(double s) const;
  double dh(double s) const;

  /// max(|m|_inf, |m'|_inf, |m''|_inf) sampled on [lo, hi].
  double c2_norm(int samples = 4097) const;

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool is_quadratic() const { return quad_; }
  const Expr& expr() const { return m_; }

 private:
  ScalarMobility() = default;
  bool quad_ = true;
  double lo_ = 0.0, hi_ = 1.0;
  Expr m_, dm_, ddm_;
};

/// Mobility matrix family M : S -> R^{n x n} with exact evaluation of M,
/// its inverse (the Hessian of the inducing potential h), directional
/// derivatives DM, D2M, and h itself.
class MobilityModel {
 public:
  enum class Family {
    FullyDecoupled,
    PerturbedDecoupled,
    VolumeFilling,
    RadialBall,
    InducedByH,
  };

  static MobilityModel fully_decoupled(std::vector<ScalarMobility> mobilities);
  static MobilityModel perturbed_decoupled(double epsilon);
  static MobilityModel volume_filling(int dimension);
  static MobilityModel radial_ball(int dimension);
  static MobilityModel induced_by_h(StateSpace space, const Expr& h);

  Family family() const { return family_; }
  const StateSpace& space() const { return space_; }
  int dim() const { return space_.dim(); }

  bool c3_exempt() const { return c3_exempt_; }
  MobilityModel& set_c3_exempt(bool v) { c3_exempt_ = v; return *this; }

  DerivativeMode derivative_mode() const { return mode_; }
  double fd_step() const { return fd_step_; }
  MobilityModel& set_derivative_mode(DerivativeMode m, double step = 1e-5);

  /// Interior clamp margin for Hessian evaluations (spec: eps_int).
  double interior_margin() const { return interior_margin_; }
  MobilityModel& set_interior_margin(double m) { interior_margin_ = m; return *this; }

  /// M(z) on all of S (continuous extension at the boundary).
  Matrix M(const Vector& z) const;

  /// Hessian of the inducing potential, equal to M(z)^{-1} on the interior;
  /// requires interior_distance(z) >= interior_margin().
  Matrix M_inverse(const Vector& z) const;

  Matrix DM(const Vector& z, const Vector& zeta) const;
  Matrix D2M(const Vector& z, const Vector& zeta, const Vector& zeta2) const;

  double h(const Vector& z) const;
  Vector grad_h(const Vector& z) const;

  /// h_ref(z) = h(z) - h(zbar)                       (case A)
  ///          = h(z) - h(zbar) - (z-zbar)' grad h(zbar)   (case B, >= 0)
  double h_ref(const Vector& z, const Vector& zbar, RefCase c) const;

  bool diagonal() const { return family_ == Family::FullyDecoupled; }
  const std::vector<ScalarMobility>& scalar_mobilities() const;
  double epsilon() const { return epsilon_; }
  const Expr& h_expression() const { return h_expr_; }

 private:
  MobilityModel(Family f, StateSpace s) : family_(f), space_(std::move(s)) {}

  void require_in_space(const Vector& z, const char* who) const;
  void require_interior(const Vector& z, const char* who, double margin) const;

  Matrix fd_DM(const Vector& z, const Vector& zeta) const;
  Matrix fd_D2M_diag(const Vector& z, const Vector& zeta) const;

  Family family_;
  StateSpace space_;
  bool c3_exempt_ = false;
  DerivativeMode mode_ = DerivativeMode::Analytic;
  double fd_step_ = 1e-5;
  double interior_margin_ = 1e-9;

  std::vector<ScalarMobility> mobilities_;  // FullyDecoupled
  double epsilon_ = 0.0;                    // PerturbedDecoupled
  Expr h_expr_;                             // InducedByH
  std::vector<Expr> h_grad_;                // InducedByH, cached d h / d z_j
  std::vector<Expr> h_hess_;                // InducedByH, row-major upper triangle
};

}  // namespace mmt
