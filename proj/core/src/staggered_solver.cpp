#include "staggered_solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mmt/errors.hpp"
#include "mmt/parallel.hpp"

namespace mmt::detail {

Matrix gaussian_smooth(const Grid1D& grid, const Matrix& values, double t) {
  if (t <= 0.0) return values;
  const int N = grid.cells;
  const double dx = grid.dx();
  const int pad = static_cast<int>(std::ceil(13.0 * std::sqrt(t) / dx)) + 2;
  Vector kernel(2 * pad + 1);
  for (int j = -pad; j <= pad; ++j)
    kernel[j + pad] = std::exp(-(j * dx) * (j * dx) / (4.0 * t));
  kernel /= kernel.sum();
  Matrix out = Matrix::Zero(values.rows(), values.cols());
  for (int i = 0; i < N; ++i) {
    for (int j = -pad; j <= pad; ++j) {
      const int src = std::clamp(i + j, 0, N - 1);  // nearest-value extension
      out.row(i) += kernel[j + pad] * values.row(src);
    }
  }
  return out;
}

namespace {

// ------------------------------------------------------------ phi proxes
//
// prox of gamma*phi at (a, b): minimize gamma*phi(z,p) + |z-a|^2/2 + |p-b|^2/2.
// For fixed z the p-minimization is exact: p*(z) = (I + 2 gamma H(z))^{-1} b
// with H = M^{-1}; the scalar (diagonal) case reduces to a 1D convex Newton
// in z with reduced objective gamma*b^2/(m(z)+2 gamma) + (z-a)^2/2.

struct ScalarProx {
  const ScalarMobility* mob;
  double margin;

  void solve(double gamma, double a, double b, double& z, double& p) const {
    const double lo = mob->lo() + margin, hi = mob->hi() - margin;
    if (!(z > lo && z < hi)) z = std::clamp(a, lo, hi);
    const double b2 = b * b;
    for (int it = 0; it < 80; ++it) {
      const double m = mob->m(z), dm = mob->dm(z), ddm = mob->ddm(z);
      const double den = m + 2.0 * gamma;
      const double g1 = -gamma * b2 * dm / (den * den) + (z - a);
      double g2 = gamma * b2 * (2.0 * dm * dm - ddm * den) / (den * den * den) + 1.0;
      if (g2 < 1e-12) g2 = 1.0;
      const double zn = std::clamp(z - g1 / g2, lo, hi);
      const bool done = std::abs(zn - z) <= 1e-15 * (1.0 + std::abs(z));
      z = zn;
      if (done || std::abs(g1) <= 1e-13 * (1.0 + std::abs(a) + gamma * b2)) break;
    }
    p = b * mob->m(z) / (mob->m(z) + 2.0 * gamma);
  }
};

struct GenericProx {
  const MobilityModel* model;
  double margin;

  double objective(double gamma, const Vector& a, const Vector& b, const Vector& z,
                   const Vector& p) const {
    const Matrix H = model->M_inverse(z);
    return gamma * p.dot(H * p) + 0.5 * (z - a).squaredNorm() +
           0.5 * (p - b).squaredNorm();
  }

  void solve(double gamma, const Vector& a, const Vector& b, Vector& z, Vector& p) const {
    const int n = model->dim();
    const StateSpace& S = model->space();
    if (z.size() != n || S.interior_distance(z) < margin)
      z = S.clamp_interior(a, margin);
    {
      const Matrix H = model->M_inverse(z);
      p = (Matrix::Identity(n, n) + 2.0 * gamma * H).ldlt().solve(b);
    }
    Vector grad(2 * n);
    Matrix hess(2 * n, 2 * n);
    std::vector<Matrix> DMj(n);
    const double gtol = 1e-11 * (1.0 + a.norm() + b.norm());
    for (int it = 0; it < 60; ++it) {
      const Matrix H = model->M_inverse(z);
      const Vector q = H * p;
      for (int j = 0; j < n; ++j) DMj[j] = model->DM(z, Vector::Unit(n, j));
      for (int j = 0; j < n; ++j)
        grad[j] = -gamma * q.dot(DMj[j] * q) + (z[j] - a[j]);
      grad.tail(n) = 2.0 * gamma * q + (p - b);
      if (grad.norm() <= gtol) break;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          const Matrix D2 = model->D2M(z, Vector::Unit(n, i), Vector::Unit(n, j));
          double v = gamma * q.dot((DMj[i] * H * DMj[j] + DMj[j] * H * DMj[i] - D2) * q);
          if (i == j) v += 1.0;
          hess(i, j) = hess(j, i) = v;
        }
      for (int j = 0; j < n; ++j) {
        const Vector col = -2.0 * gamma * (H * (DMj[j] * q));
        for (int i = 0; i < n; ++i) {
          hess(n + i, j) = col[i];
          hess(j, n + i) = col[i];
        }
      }
      hess.bottomRightCorner(n, n) = 2.0 * gamma * H + Matrix::Identity(n, n);
      Vector dir = hess.ldlt().solve(-grad);
      const Vector dz = dir.head(n), dp = dir.tail(n);
      const double g0 = objective(gamma, a, b, z, p);
      const double slope = grad.dot(dir);
      double t = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 50; ++ls) {
        const Vector zt = z + t * dz;
        if (S.interior_distance(zt) >= margin) {
          const Vector pt = p + t * dp;
          if (objective(gamma, a, b, zt, pt) <= g0 + 1e-4 * t * slope) {
            z = zt;
            p = pt;
            accepted = true;
            break;
          }
        }
        t *= 0.5;
      }
      if (!accepted) break;
    }
  }
};

// projected Newton for the free-terminal endpoint term
void endpoint_prox(const EndpointObjective& ep, double sigma, int cell, const Vector& x,
                   Vector& e) {
  const int n = static_cast<int>(x.size());
  const StateSpace& S = *ep.space;
  if (e.size() != n) e = S.project(x);
  e = S.project(e);
  Vector grad(n);
  Matrix hess(n, n);
  auto total = [&](const Vector& v) {
    return ep.weight * ep.value(cell, v) + 0.5 * sigma * (v - x).squaredNorm();
  };
  for (int it = 0; it < 60; ++it) {
    ep.derivatives(cell, e, grad, hess);
    Vector g = ep.weight * grad + sigma * (e - x);
    if ((e - S.project(e - g)).norm() <= 1e-12 * (1.0 + x.norm()) * sigma) break;
    Matrix Hs = ep.weight * hess + sigma * Matrix::Identity(n, n);
    Vector dir = Hs.ldlt().solve(-g);
    const double f0 = total(e);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Vector trial = S.project(e + t * dir);
      if ((trial - e).norm() <= 1e-15 * (1.0 + e.norm())) break;
      if (total(trial) <= f0) {
        e = trial;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
}

// ------------------------------------------------------------ state

struct Primal {
  std::vector<Matrix> mu;  // K+1 slices, N x n
  std::vector<Matrix> w;   // K half-slices, (N+1) x n
};

struct Dual {
  std::vector<Matrix> vz, vp;  // K matrices, (N-1) x n
  Matrix ve;                   // N x n (free-terminal mode only)
};

struct Shape {
  int K = 0, N = 0, n = 0;
  bool fixed_end = true;
};

Primal zeros_like(const Shape& s) {
  Primal u;
  u.mu.assign(s.K + 1, Matrix::Zero(s.N, s.n));
  u.w.assign(s.K, Matrix::Zero(s.N + 1, s.n));
  return u;
}

Dual zero_dual(const Shape& s) {
  Dual v;
  v.vz.assign(s.K, Matrix::Zero(s.N - 1, s.n));
  v.vp.assign(s.K, Matrix::Zero(s.N - 1, s.n));
  if (!s.fixed_end) v.ve = Matrix::Zero(s.N, s.n);
  return v;
}

void apply_K(const Shape& s, const Primal& u, Dual& out) {
  for (int k = 0; k < s.K; ++k) {
    const Matrix& m0 = u.mu[k];
    const Matrix& m1 = u.mu[k + 1];
    Matrix& vz = out.vz[k];
    for (int f = 1; f < s.N; ++f)
      vz.row(f - 1) = 0.25 * (m0.row(f - 1) + m0.row(f) + m1.row(f - 1) + m1.row(f));
    out.vp[k] = u.w[k].middleRows(1, s.N - 1);
  }
  if (!s.fixed_end) out.ve = u.mu[s.K];
}

void apply_KT(const Shape& s, const Dual& v, Primal& out) {
  for (auto& m : out.mu) m.setZero();
  for (auto& w : out.w) w.setZero();
  for (int k = 0; k < s.K; ++k) {
    const Matrix& vz = v.vz[k];
    const bool lo_free = k >= 1;
    const bool hi_free = (k + 1 <= s.K - 1) || !s.fixed_end;
    for (int f = 1; f < s.N; ++f) {
      const auto row = 0.25 * vz.row(f - 1);
      if (lo_free) {
        out.mu[k].row(f - 1) += row;
        out.mu[k].row(f) += row;
      }
      if (hi_free) {
        out.mu[k + 1].row(f - 1) += row;
        out.mu[k + 1].row(f) += row;
      }
    }
    out.w[k].middleRows(1, s.N - 1) = v.vp[k];
  }
  if (!s.fixed_end) out.mu[s.K] += v.ve;
}

double free_norm2(const Shape& s, const Primal& u) {
  double acc = 0.0;
  const int last = s.fixed_end ? s.K - 1 : s.K;
  for (int k = 1; k <= last; ++k) acc += u.mu[k].squaredNorm();
  for (int k = 0; k < s.K; ++k) acc += u.w[k].middleRows(1, s.N - 1).squaredNorm();
  return acc;
}

double operator_norm(const Shape& s) {
  Primal u = zeros_like(s);
  uint64_t rng = 0x9e3779b97f4a7c15ull;
  auto next = [&rng]() {
    rng ^= rng << 13;
    rng ^= rng >> 7;
    rng ^= rng << 17;
    return 2.0 * (static_cast<double>(rng % 1000003) / 1000003.0) - 1.0;
  };
  const int last = s.fixed_end ? s.K - 1 : s.K;
  for (int k = 1; k <= last; ++k)
    for (int i = 0; i < s.N; ++i)
      for (int j = 0; j < s.n; ++j) u.mu[k](i, j) = next();
  for (int k = 0; k < s.K; ++k)
    for (int f = 1; f < s.N; ++f)
      for (int j = 0; j < s.n; ++j) u.w[k](f, j) = next();
  Dual v = zero_dual(s);
  Primal g = zeros_like(s);
  double norm = 1.0;
  for (int it = 0; it < 40; ++it) {
    apply_K(s, u, v);
    apply_KT(s, v, g);
    norm = std::sqrt(free_norm2(s, g));
    if (norm <= 0.0) return 1.0;
    const int lastk = s.fixed_end ? s.K - 1 : s.K;
    for (int k = 1; k <= lastk; ++k) u.mu[k] = g.mu[k] / norm;
    for (int k = 0; k < s.K; ++k) u.w[k] = g.w[k] / norm;
  }
  return std::sqrt(norm);
}

// ------------------------------------------------------------ CE projection

class CeProjector {
 public:
  CeProjector(const Shape& s, double dt, double dx, const Matrix& mu_start,
              const std::optional<Matrix>& mu_end)
      : s_(s), dt_(dt), dx_(dx) {
    const int K = s.K, N = s.N;

    // column layout: free mu slices first, then free w faces
    const int mu_slices = s.fixed_end ? K - 1 : K;
    n_mu_ = mu_slices * N;
    wcol_.assign(K, std::vector<int>(N + 1, -1));
    int next_col = n_mu_;
    for (int k = 0; k < K; ++k)
      for (int f = 1; f < N; ++f) wcol_[k][f] = next_col++;
    const int ncols = next_col;

    // with both endpoints fixed the constraints telescope to the endpoint
    // mass difference, leaving one redundant row
    std::vector<bool> drop(static_cast<size_t>(K) * N, false);
    if (s.fixed_end) drop[static_cast<size_t>(K) * N - 1] = true;
    row_of_.assign(static_cast<size_t>(K) * N, -1);
    int next_row = 0;
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < N; ++i)
        if (!drop[static_cast<size_t>(k) * N + i])
          row_of_[static_cast<size_t>(k) * N + i] = next_row++;
    rows_ = next_row;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(rows_) * 4);
    auto mu_col = [&](int slice, int i) { return (slice - 1) * N + i; };
    b_ = Matrix::Zero(rows_, s.n);
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < N; ++i) {
        const int r = row_of_[static_cast<size_t>(k) * N + i];
        if (r < 0) continue;
        if (k + 1 <= K - 1 || !s.fixed_end)
          trip.emplace_back(r, mu_col(k + 1, i), 1.0 / dt_);
        else
          b_.row(r) -= mu_end->row(i) / dt_;
        if (k >= 1)
          trip.emplace_back(r, mu_col(k, i), -1.0 / dt_);
        else
          b_.row(r) += mu_start.row(i) / dt_;
        if (wcol_[k][i + 1] >= 0) trip.emplace_back(r, wcol_[k][i + 1], 1.0 / dx_);
        if (wcol_[k][i] >= 0) trip.emplace_back(r, wcol_[k][i], -1.0 / dx_);
      }
    A_.resize(rows_, ncols);
    A_.setFromTriplets(trip.begin(), trip.end());
    A_.makeCompressed();
    AT_ = A_.transpose();
    Eigen::SparseMatrix<double> AAT = A_ * AT_;
    chol_.compute(AAT);
    if (chol_.info() != Eigen::Success)
      throw NumericalError("continuity projector: factorization failed");
    ncols_ = ncols;
  }

  // exact affine projection; multipliers retained as the dual potential
  void project(Primal& u) {
    const int K = s_.K, N = s_.N;
    lambda_.resize(rows_, s_.n);
    Vector x(ncols_);
    const int last = s_.fixed_end ? K - 1 : K;
    for (int j = 0; j < s_.n; ++j) {
      for (int k = 1; k <= last; ++k)
        for (int i = 0; i < N; ++i) x[(k - 1) * N + i] = u.mu[k](i, j);
      for (int k = 0; k < K; ++k)
        for (int f = 1; f < N; ++f)
          if (wcol_[k][f] >= 0) x[wcol_[k][f]] = u.w[k](f, j);
      Vector r = A_ * x - b_.col(j);
      Vector lam = chol_.solve(r);
      lambda_.col(j) = lam;
      x -= AT_ * lam;
      for (int k = 1; k <= last; ++k)
        for (int i = 0; i < N; ++i) u.mu[k](i, j) = x[(k - 1) * N + i];
      for (int k = 0; k < K; ++k)
        for (int f = 1; f < N; ++f)
          if (wcol_[k][f] >= 0) u.w[k](f, j) = x[wcol_[k][f]];
    }
  }

  std::vector<Matrix> dual_potential() const {
    std::vector<Matrix> xi(s_.K, Matrix::Zero(s_.N, s_.n));
    for (int k = 0; k < s_.K; ++k)
      for (int i = 0; i < s_.N; ++i) {
        const int r = row_of_[static_cast<size_t>(k) * s_.N + i];
        if (r >= 0) xi[k].row(i) = lambda_.row(r);
      }
    return xi;
  }

 private:
  Shape s_;
  double dt_, dx_;
  int n_mu_ = 0, rows_ = 0, ncols_ = 0;
  std::vector<std::vector<int>> wcol_;
  std::vector<int> row_of_;
  Eigen::SparseMatrix<double> A_, AT_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol_;
  Matrix b_;
  Matrix lambda_;
};

// ------------------------------------------------------------ objectives

// barrier view of the action used for convergence monitoring: the centered
// state is clamped to the interior margin, matching what the prox solves
double monitor_phi(const MobilityModel& model, const Vector& z, const Vector& p,
                   double margin, double cap) {
  const Vector zc = model.space().clamp_interior(model.space().project(z), margin);
  const double val = p.dot(model.M_inverse(zc) * p);
  return std::min(val, cap);
}

double monitored_objective(const StaggeredProblem& prob, const Shape& s, const Primal& u,
                           double margin) {
  const double dt = 1.0 / s.K;
  const double dx = prob.grid.dx();
  const StateSpace& S = prob.model->space();
  double acc = 0.0;
  for (int k = 0; k < s.K; ++k)
    for (int f = 1; f < s.N; ++f) {
      const Vector z = 0.25 * (u.mu[k].row(f - 1) + u.mu[k].row(f) +
                               u.mu[k + 1].row(f - 1) + u.mu[k + 1].row(f))
                                  .transpose();
      acc += monitor_phi(*prob.model, z, u.w[k].row(f).transpose(), margin,
                         prob.action.infinity_surrogate);
    }
  double obj = prob.phi_weight * dt * dx * acc;
  if (prob.endpoint) {
    for (int i = 0; i < s.N; ++i)
      obj += prob.endpoint->weight *
             prob.endpoint->value(i, S.project(u.mu[s.K].row(i).transpose()));
  }
  return obj;
}

}  // namespace

PdhgStats pdhg_solve(const StaggeredProblem& prob, const SolverOptions& opts,
                     TransportPath& out) {
  const int K = prob.steps;
  const int N = prob.grid.cells;
  const int n = static_cast<int>(prob.mu_start.cols());
  if (K < 1 || N < 3) throw InputError("staggered solver: needs K >= 1 and N >= 3");
  if (prob.mu_end.has_value() == (prob.endpoint != nullptr))
    throw InputError("staggered solver: exactly one of mu_end/endpoint required");

  Shape s{K, N, n, prob.mu_end.has_value()};
  const double dt = 1.0 / K;
  const double dx = prob.grid.dx();
  const double c_phi = prob.phi_weight * dt * dx;
  const double prox_margin = std::max(prob.model->interior_margin(), 1e-11);

  PdhgStats stats;
  Matrix mu_start = prob.mu_start;
  Matrix mu_end = prob.mu_end ? *prob.mu_end : Matrix();

  for (int attempt = 0; attempt < 2; ++attempt) {
    Primal u = zeros_like(s);
    u.mu[0] = mu_start;
    if (s.fixed_end) {
      for (int k = 1; k < K; ++k) {
        const double t = static_cast<double>(k) / K;
        u.mu[k] = (1.0 - t) * mu_start + t * mu_end;
      }
      u.mu[K] = mu_end;
      for (int k = 0; k < K; ++k) {
        Matrix& w = u.w[k];
        for (int i = 0; i < N; ++i)
          w.row(i + 1) = w.row(i) - (dx / dt) * (u.mu[k + 1].row(i) - u.mu[k].row(i));
        w.row(N).setZero();
      }
    } else {
      for (int k = 1; k <= K; ++k) u.mu[k] = mu_start;
    }

    CeProjector projector(s, dt, dx, mu_start,
                          s.fixed_end ? std::optional<Matrix>(mu_end) : std::nullopt);
    projector.project(u);

    const double knorm = operator_norm(s);
    const double sigma = opts.step_ratio * 0.95 / knorm;
    const double tau = (1.0 / opts.step_ratio) * 0.95 / knorm;

    Dual v = zero_dual(s);
    Primal ubar = u, uold = u, grad = zeros_like(s);
    Dual ku = zero_dual(s);

    std::vector<Matrix> pz(K, Matrix::Zero(N - 1, n)), pp(K, Matrix::Zero(N - 1, n));
    Matrix pe;
    if (!s.fixed_end) pe = mu_start;
    for (int k = 0; k < K; ++k)
      for (int f = 1; f < N; ++f)
        pz[k].row(f - 1) = 0.25 * (u.mu[k].row(f - 1) + u.mu[k].row(f) +
                                   u.mu[k + 1].row(f - 1) + u.mu[k + 1].row(f));

    GenericProx generic_prox{prob.model, prox_margin};
    const bool diagonal = prob.model->diagonal();
    const auto* mobs = diagonal ? &prob.model->scalar_mobilities() : nullptr;
    const double gamma = c_phi / sigma;

    double prev_obj = monitored_objective(prob, s, u, prox_margin);
    int consecutive_ok = 0;
    int it = 0;
    bool converged = false;

    for (it = 1; it <= opts.max_iters; ++it) {
      apply_K(s, ubar, ku);
      parallel_for(K, [&](int k) {
        Vector z(n), p(n), az(n), bp(n);
        for (int f = 1; f < N; ++f) {
          for (int j = 0; j < n; ++j) {
            az[j] = v.vz[k](f - 1, j) + sigma * ku.vz[k](f - 1, j);
            bp[j] = v.vp[k](f - 1, j) + sigma * ku.vp[k](f - 1, j);
          }
          const Vector yz = az, yp = bp;
          az /= sigma;
          bp /= sigma;
          z = pz[k].row(f - 1).transpose();
          p = pp[k].row(f - 1).transpose();
          if (diagonal) {
            for (int j = 0; j < n; ++j) {
              ScalarProx sp{&(*mobs)[j], prox_margin};
              sp.solve(gamma, az[j], bp[j], z[j], p[j]);
            }
          } else {
            generic_prox.solve(gamma, az, bp, z, p);
          }
          pz[k].row(f - 1) = z.transpose();
          pp[k].row(f - 1) = p.transpose();
          v.vz[k].row(f - 1) = (yz - sigma * z).transpose();
          v.vp[k].row(f - 1) = (yp - sigma * p).transpose();
        }
      });
      if (!s.fixed_end) {
        for (int i = 0; i < N; ++i) {
          Vector ye = v.ve.row(i).transpose() + sigma * ku.ve.row(i).transpose();
          Vector e = pe.row(i).transpose();
          endpoint_prox(*prob.endpoint, sigma, i, ye / sigma, e);
          pe.row(i) = e.transpose();
          v.ve.row(i) = (ye - sigma * e).transpose();
        }
      }

      uold = u;
      apply_KT(s, v, grad);
      const int last = s.fixed_end ? K - 1 : K;
      for (int k = 1; k <= last; ++k) u.mu[k] -= tau * grad.mu[k];
      for (int k = 0; k < K; ++k)
        u.w[k].middleRows(1, N - 1) -= tau * grad.w[k].middleRows(1, N - 1);
      projector.project(u);
      for (int k = 1; k <= last; ++k) ubar.mu[k] = 2.0 * u.mu[k] - uold.mu[k];
      for (int k = 0; k < K; ++k) ubar.w[k] = 2.0 * u.w[k] - uold.w[k];

      if (it % opts.check_every == 0 || it == opts.max_iters) {
        const double obj = monitored_objective(prob, s, u, prox_margin);
        const double change = std::abs(obj - prev_obj) / std::max(std::abs(obj), 1e-12);
        prev_obj = obj;
        if (change < opts.rel_energy_tol)
          ++consecutive_ok;
        else
          consecutive_ok = 0;
        if (consecutive_ok >= 2 && it >= opts.min_iters) {
          converged = true;
          break;
        }
      }
    }

    double move = 0.0;
    {
      double num = 0.0;
      const int last = s.fixed_end ? K - 1 : K;
      for (int k = 1; k <= last; ++k) num += (u.mu[k] - uold.mu[k]).squaredNorm();
      for (int k = 0; k < K; ++k) num += (u.w[k] - uold.w[k]).squaredNorm();
      move = std::sqrt(num) / (tau * (1.0 + std::sqrt(free_norm2(s, u))));
    }

    auto fill_out = [&](const Primal& state, const CeProjector& proj) {
      out.grid = prob.grid;
      out.duration = 1.0;
      out.densities = state.mu;
      out.fluxes = state.w;
      out.dual_potential = proj.dual_potential();
    };
    fill_out(u, projector);

    // Exact extended-real rescoring. Iteration noise can leave tiny flux on
    // spectrally degenerate faces, which the lower-semicontinuous action
    // classifies as infinite. In that case blend the whole path toward the
    // interior: mu -> (1-theta) mu + theta center, w -> (1-theta) w. The map
    // is linear, so the discrete continuity equation survives exactly, and
    // the energy shifts by O(theta).
    double energy = path_energy(*prob.model, out, prob.action);
    double lift = 0.0;
    if (!std::isfinite(energy)) {
      const Vector center = prob.model->space().center();
      for (double theta : {1e-9, 1e-8, 1e-7, 1e-6, 1e-5}) {
        TransportPath trial;
        trial.grid = prob.grid;
        trial.duration = 1.0;
        trial.densities = out.densities;
        trial.fluxes = out.fluxes;
        for (auto& m : trial.densities) {
          m *= (1.0 - theta);
          m.rowwise() += theta * center.transpose();
        }
        for (auto& w : trial.fluxes) w *= (1.0 - theta);
        const double e2 = path_energy(*prob.model, trial, prob.action);
        if (std::isfinite(e2)) {
          out.densities = std::move(trial.densities);
          out.fluxes = std::move(trial.fluxes);
          energy = e2;
          lift = theta;
          break;
        }
      }
    }
    stats.interior_lift = lift;

    stats.iterations = it > opts.max_iters ? opts.max_iters : it;
    stats.converged = converged;
    stats.gap = move;
    stats.residual = mmt::continuity_residual(out);
    stats.path_energy = energy;
    stats.endpoint_value = 0.0;
    if (prob.endpoint) {
      const StateSpace& S = prob.model->space();
      for (int i = 0; i < N; ++i)
        stats.endpoint_value +=
            prob.endpoint->weight *
            prob.endpoint->value(i, S.project(out.densities[K].row(i).transpose()));
    }

    if (std::isfinite(stats.path_energy) || !opts.allow_mollify || attempt == 1) break;

    // stalled on boundary-valued endpoints: one discrete heat step
    const double delta0 = dx * dx;
    mu_start = gaussian_smooth(prob.grid, mu_start, delta0);
    if (s.fixed_end) mu_end = gaussian_smooth(prob.grid, mu_end, delta0);
    stats.mollified = true;
  }
  return stats;
}

}  // namespace mmt::detail

namespace mmt {

GeodesicResult solve_distance(const MobilityModel& model, const GridDensity& mu0,
                              const GridDensity& mu1, const SolverOptions& opts,
                              const ActionConfig& cfg) {
  if (!(mu0.grid == mu1.grid)) throw InputError("solve_distance: endpoint grids differ");
  if (mu0.components() != mu1.components() || mu0.components() != model.dim())
    throw InputError("solve_distance: component counts differ");
  mu0.validate(model.space());
  mu1.validate(model.space());
  for (int j = 0; j < mu0.components(); ++j) {
    const double m0 = mu0.mass(j), m1 = mu1.mass(j);
    if (std::abs(m0 - m1) > opts.mass_tol * (1.0 + std::abs(m0)))
      throw ModelError(
          "solve_distance: per-component mass mismatch; no-flux boundaries make the "
          "endpoints unreachable (distance is +infinity)");
  }

  GeodesicResult res;
  if ((mu0.values - mu1.values).cwiseAbs().maxCoeff() == 0.0) {
    res.path.grid = mu0.grid;
    res.path.duration = 1.0;
    res.path.densities.assign(opts.time_steps + 1, mu0.values);
    res.path.fluxes.assign(opts.time_steps,
                           Matrix::Zero(mu0.cells() + 1, mu0.components()));
    res.distance = 0.0;
    res.per_slice_action = Vector::Zero(opts.time_steps);
    res.converged = true;
    return res;
  }

  detail::StaggeredProblem prob;
  prob.model = &model;
  prob.grid = mu0.grid;
  prob.steps = opts.time_steps;
  prob.phi_weight = 1.0;
  prob.mu_start = mu0.values;
  prob.mu_end = mu1.values;
  prob.action = cfg;

  detail::PdhgStats stats = detail::pdhg_solve(prob, opts, res.path);
  res.distance = std::isfinite(stats.path_energy)
                     ? std::sqrt(std::max(0.0, stats.path_energy))
                     : std::numeric_limits<double>::infinity();
  res.per_slice_action = per_slice_action(model, res.path, cfg);
  res.iterations = stats.iterations;
  res.converged = stats.converged;
  res.primal_dual_gap = stats.gap;
  res.continuity_residual = stats.residual;
  res.mollified_endpoints = stats.mollified;
  res.interior_lift = stats.interior_lift;
  return res;
}

}  // namespace mmt
