#include "mmt/transport.hpp"

#include <algorithm>
#include <cmath>

#include "mmt/errors.hpp"

namespace mmt {

double continuity_residual(const TransportPath& path) {
  const int K = path.steps();
  const int N = path.cells();
  const double dt = path.dt();
  const double dx = path.grid.dx();
  double worst = 0.0;
  for (int k = 0; k < K; ++k) {
    const Matrix& a = path.densities[k];
    const Matrix& b = path.densities[k + 1];
    const Matrix& w = path.fluxes[k];
    for (int i = 0; i < N; ++i) {
      const auto r =
          ((b.row(i) - a.row(i)) / dt + (w.row(i + 1) - w.row(i)) / dx).cwiseAbs();
      worst = std::max(worst, r.maxCoeff());
    }
  }
  return worst;
}

TransportPath linear_interpolation_path(const GridDensity& mu0, const GridDensity& mu1,
                                        int steps) {
  if (!(mu0.grid == mu1.grid))
    throw InputError("linear interpolation: endpoint grids differ");
  if (mu0.components() != mu1.components())
    throw InputError("linear interpolation: component counts differ");
  if (steps < 1) throw InputError("linear interpolation: needs at least one step");
  const int N = mu0.cells();
  const int n = mu0.components();
  TransportPath path;
  path.grid = mu0.grid;
  path.duration = 1.0;
  const double dt = 1.0 / steps;
  const double dx = mu0.grid.dx();
  path.densities.resize(steps + 1);
  path.fluxes.assign(steps, Matrix::Zero(N + 1, n));
  for (int k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) / steps;
    path.densities[k] = (1.0 - t) * mu0.values + t * mu1.values;
  }
  for (int k = 0; k < steps; ++k) {
    Matrix& w = path.fluxes[k];
    for (int i = 0; i < N; ++i)
      w.row(i + 1) =
          w.row(i) - (dx / dt) * (path.densities[k + 1].row(i) - path.densities[k].row(i));
    w.row(N).setZero();  // exact up to the mass defect of the endpoints
  }
  return path;
}

TransportPath concatenate(const TransportPath& a, const TransportPath& b) {
  if (!(a.grid == b.grid)) throw InputError("concatenate: grids differ");
  if (a.components() != b.components())
    throw InputError("concatenate: component counts differ");
  if (std::abs(a.dt() - b.dt()) > 1e-14 * std::max(a.dt(), b.dt()))
    throw InputError("concatenate: time grids must align");
  const double scale = 1.0 + a.densities.back().cwiseAbs().maxCoeff();
  if ((a.densities.back() - b.densities.front()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InputError("concatenate: terminal slice of a differs from initial slice of b");
  TransportPath out;
  out.grid = a.grid;
  out.duration = a.duration + b.duration;
  out.densities = a.densities;
  out.densities.insert(out.densities.end(), b.densities.begin() + 1, b.densities.end());
  out.fluxes = a.fluxes;
  out.fluxes.insert(out.fluxes.end(), b.fluxes.begin(), b.fluxes.end());
  return out;
}

TransportPath rescale(const TransportPath& path, double new_duration) {
  if (new_duration <= 0.0) throw InputError("rescale: duration must be positive");
  TransportPath out = path;
  out.duration = new_duration;
  const double factor = path.duration / new_duration;
  for (auto& w : out.fluxes) w *= factor;
  return out;
}

TransportPath rescale(const TransportPath& path, const std::vector<int>& node_of_old,
                      double new_duration) {
  const int K = path.steps();
  const int Kp = static_cast<int>(node_of_old.size()) - 1;
  if (Kp < 1 || node_of_old.front() != 0 || node_of_old.back() != K)
    throw InputError("rescale: node map must run from node 0 to node K");
  for (int k = 0; k < Kp; ++k)
    if (node_of_old[k + 1] <= node_of_old[k])
      throw InputError("rescale: node map must be strictly increasing");
  TransportPath out;
  out.grid = path.grid;
  out.duration = new_duration;
  const double dt_old = path.dt();
  const double dt_new = new_duration / Kp;
  out.densities.resize(Kp + 1);
  out.fluxes.resize(Kp);
  for (int k = 0; k <= Kp; ++k) out.densities[k] = path.densities[node_of_old[k]];
  for (int k = 0; k < Kp; ++k) {
    Matrix acc = Matrix::Zero(path.cells() + 1, path.components());
    for (int j = node_of_old[k]; j < node_of_old[k + 1]; ++j) acc += dt_old * path.fluxes[j];
    out.fluxes[k] = acc / dt_new;
  }
  return out;
}

TransportPath time_reverse(const TransportPath& path) {
  TransportPath out;
  out.grid = path.grid;
  out.duration = path.duration;
  out.densities.assign(path.densities.rbegin(), path.densities.rend());
  for (auto it = path.fluxes.rbegin(); it != path.fluxes.rend(); ++it)
    out.fluxes.push_back(-*it);
  return out;
}

double quantile_w2(const GridDensity& nu0, const GridDensity& nu1, int quantiles) {
  if (nu0.components() != 1 || nu1.components() != 1)
    throw InputError("quantile_w2: expects scalar densities");
  if (!(nu0.grid == nu1.grid)) throw InputError("quantile_w2: grids differ");
  if ((nu0.values.array() < 0.0).any() || (nu1.values.array() < 0.0).any())
    throw InputError("quantile_w2: densities must be nonnegative");
  const int N = nu0.cells();
  const double dx = nu0.grid.dx();

  auto cdf = [&](const GridDensity& nu) {
    Vector C(N + 1);
    C[0] = 0.0;
    for (int i = 0; i < N; ++i) C[i + 1] = C[i] + dx * nu.values(i, 0);
    return C;
  };
  const Vector C0 = cdf(nu0), C1 = cdf(nu1);
  const double m0 = C0[N], m1 = C1[N];
  if (m0 <= 0.0 || m1 <= 0.0) throw InputError("quantile_w2: zero mass");
  if (std::abs(m0 - m1) > 1e-9 * std::max(m0, m1))
    throw InputError("quantile_w2: mass mismatch");
  const double m = 0.5 * (m0 + m1);

  auto inverse = [&](const Vector& C, const GridDensity& nu, double q) {
    // piecewise-linear CDF between faces; inverse by binary search
    int lo = 0, hi = N;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (C[mid] <= q ? lo : hi) = mid;
    }
    const double rho = nu.values(lo, 0);
    if (rho <= 0.0) return nu.grid.face_x(lo);
    return nu.grid.face_x(lo) + (q - C[lo]) / rho;
  };

  double acc = 0.0;
  for (int l = 0; l < quantiles; ++l) {
    const double q = (l + 0.5) * m / quantiles;
    const double d = inverse(C0, nu0, std::min(q, m0)) - inverse(C1, nu1, std::min(q, m1));
    acc += d * d;
  }
  return std::sqrt(acc * m / quantiles);
}

}  // namespace mmt
