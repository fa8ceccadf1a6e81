#include "mmt/action.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "mmt/errors.hpp"
#include "mmt/transport.hpp"

namespace mmt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double action_density(const MobilityModel& model, const Vector& z, const Vector& p,
                      const ActionConfig& cfg) {
  if (z.size() != model.dim() || p.size() != model.dim())
    throw InputError("action_density: dimension mismatch");
  if (!model.space().contains(z))
    throw InputError("action_density: state outside the state space");
  const double pn = p.norm();
  if (pn == 0.0) return 0.0;

  Eigen::SelfAdjointEigenSolver<Matrix> es(model.M(z));
  const Vector& lam = es.eigenvalues();
  const Matrix& V = es.eigenvectors();
  const Vector q = V.transpose() * p;

  double value = 0.0;
  double outside2 = 0.0;
  for (int i = 0; i < lam.size(); ++i) {
    if (lam[i] >= cfg.singular_eig_tol)
      value += q[i] * q[i] / lam[i];
    else
      outside2 += q[i] * q[i];
  }
  if (std::sqrt(outside2) > cfg.range_residual_tol * pn) return kInf;
  return value;
}

namespace {

// face quadrature with half weights at the two boundary faces; exact for
// constant integrands
double face_sum(const MobilityModel& model, const GridDensity& mu, const Matrix& w,
                const ActionConfig& cfg) {
  const int N = mu.cells();
  const int n = mu.components();
  if (w.rows() != N + 1 || w.cols() != n)
    throw InputError("action_functional: flux shape does not match grid");
  const StateSpace& S = model.space();
  double acc = 0.0;
  for (int f = 0; f <= N; ++f) {
    Vector zf(n);
    if (f == 0)
      zf = mu.values.row(0).transpose();
    else if (f == N)
      zf = mu.values.row(N - 1).transpose();
    else
      zf = 0.5 * (mu.values.row(f - 1) + mu.values.row(f)).transpose();
    zf = S.project(zf);
    const double weight = (f == 0 || f == N) ? 0.5 : 1.0;
    const double phi = action_density(model, zf, w.row(f).transpose(), cfg);
    if (std::isinf(phi)) return kInf;
    acc += weight * phi;
  }
  return acc;
}

}  // namespace

double action_functional(const MobilityModel& model, const GridDensity& mu,
                         const Matrix& w, const ActionConfig& cfg) {
  const double s = face_sum(model, mu, w, cfg);
  return std::isinf(s) ? s : mu.grid.dx() * s;
}

Vector per_slice_action(const MobilityModel& model, const TransportPath& path,
                        const ActionConfig& cfg) {
  const int K = path.steps();
  Vector out(K);
  for (int k = 0; k < K; ++k) {
    GridDensity mid{path.grid, 0.5 * (path.densities[k] + path.densities[k + 1])};
    out[k] = action_functional(model, mid, path.fluxes[k], cfg);
  }
  return out;
}

double path_energy(const MobilityModel& model, const TransportPath& path,
                   const ActionConfig& cfg) {
  const Vector slices = per_slice_action(model, path, cfg);
  double acc = 0.0;
  for (int k = 0; k < slices.size(); ++k) {
    if (std::isinf(slices[k])) return kInf;
    acc += slices[k];
  }
  return path.dt() * acc;
}

}  // namespace mmt
