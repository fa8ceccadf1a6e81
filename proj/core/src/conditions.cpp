#include "mmt/conditions.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "mmt/errors.hpp"
#include "mmt/parallel.hpp"

namespace mmt {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

std::string resolution_note(const SamplePlan& plan) {
  std::ostringstream os;
  os << "no violation found at resolution: " << plan.points << " interior points x "
     << plan.directions << " directions, margin " << plan.margin;
  return os.str();
}

struct Accumulator {
  double worst = std::numeric_limits<double>::infinity();
  std::optional<Witness> witness;
  long checked = 0;

  void feed(double margin, const Witness& w) {
    ++checked;
    if (margin < worst) {
      worst = margin;
      witness = w;
    }
  }
};

ConditionReport finish(std::string name, const Accumulator& acc,
                       const ConditionTolerances& tol, const std::string& pass_note) {
  ConditionReport rep;
  rep.condition = std::move(name);
  rep.samples_checked = acc.checked;
  rep.worst_value = acc.worst;
  if (acc.worst >= -tol.pass) {
    rep.verdict = Verdict::Pass;
    rep.note = pass_note;
  } else if (acc.worst < -tol.fail) {
    rep.verdict = Verdict::Fail;
    rep.witness = acc.witness;
    rep.note = "violation below -fail_tol; witness recorded";
  } else {
    rep.verdict = Verdict::Inconclusive;
    rep.witness = acc.witness;
    rep.note = "worst margin between pass and fail tolerances";
  }
  return rep;
}

// symmetrized matrix of a quadratic form given by an evaluator q with q(0)=0
Matrix polarize(int dim, const std::function<double(const Vector&)>& q) {
  Matrix Q(dim, dim);
  Vector diag(dim);
  for (int i = 0; i < dim; ++i) diag[i] = q(Vector::Unit(dim, i));
  for (int i = 0; i < dim; ++i) {
    Q(i, i) = diag[i];
    for (int j = i + 1; j < dim; ++j) {
      const double v = q(Vector::Unit(dim, i) + Vector::Unit(dim, j));
      Q(i, j) = Q(j, i) = 0.5 * (v - diag[i] - diag[j]);
    }
  }
  return Q;
}

}  // namespace

ConditionReport check_C0(const MobilityModel& model, int boundary_samples, uint64_t seed,
                         const ConditionTolerances& tol) {
  const auto pts = sample_boundary(model.space(), boundary_samples, seed);
  const Vector center = model.space().center();
  Accumulator acc;
  for (const auto& zb : pts) {
    const Vector dir = center - zb;
    const double len = dir.norm();
    if (len <= 0.0) continue;
    const Matrix Mb = model.M(zb);
    const double scale = 1.0 + Mb.norm();
    double prev = std::numeric_limits<double>::infinity();
    bool shrinking = true;
    double final_diff = 0.0;
    for (double t : {1e-2, 1e-4, 1e-6}) {
      const Vector zt = zb + t * dir;
      const double diff = (model.M(zt) - Mb).norm() / scale;
      shrinking = shrinking && diff <= prev * (1.0 + 1e-9) + 1e-15;
      prev = diff;
      final_diff = diff;
    }
    // margin: continuity demands the inward difference to vanish
    const double margin = (shrinking ? 1e-4 : 0.0) - final_diff;
    Witness w;
    w.z = zb;
    w.raw_value = final_diff;
    acc.feed(margin / 1e-4, w);
  }
  ConditionTolerances t0 = tol;
  t0.pass = 1e-9;
  t0.fail = 1e-6;
  return finish("C0", acc, t0,
                "boundary continuity verified along inward segments at " +
                    std::to_string(boundary_samples) + " boundary states");
}

ConditionReport check_C1(const MobilityModel& model, const SamplePlan& plan,
                         const ConditionTolerances& tol) {
  const auto pts = sample_interior(model.space(), plan);
  std::vector<double> margins(pts.size());
  std::vector<double> raws(pts.size());
  parallel_for(static_cast<int>(pts.size()), [&](int i) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(model.M(pts[i]));
    const double lam_min = es.eigenvalues().minCoeff();
    const double scale = 1.0 + es.eigenvalues().cwiseAbs().maxCoeff();
    margins[i] = lam_min / scale;
    raws[i] = lam_min;
  });
  Accumulator acc;
  for (size_t i = 0; i < pts.size(); ++i) {
    Witness w;
    w.z = pts[i];
    w.raw_value = raws[i];
    acc.feed(margins[i], w);
  }
  return finish("C1", acc, tol, resolution_note(plan));
}

ConditionReport check_C2(const MobilityModel& model, const SamplePlan& plan, bool strict,
                         const ConditionTolerances& tol) {
  const auto pts = sample_interior(model.space(), plan);
  const auto dirs = sample_directions(model.dim(), plan);
  const int P = static_cast<int>(pts.size());
  const int D = static_cast<int>(dirs.size());
  std::vector<double> margins(static_cast<size_t>(P) * D);
  std::vector<double> raws(margins.size());
  parallel_for(P, [&](int i) {
    for (int d = 0; d < D; ++d) {
      const Matrix D2 = model.D2M(pts[i], dirs[d], dirs[d]);
      Eigen::SelfAdjointEigenSolver<Matrix> es(D2);
      const double lam_max = es.eigenvalues().maxCoeff();
      const double scale = 1.0 + es.eigenvalues().cwiseAbs().maxCoeff();
      margins[static_cast<size_t>(i) * D + d] = -lam_max / scale;
      raws[static_cast<size_t>(i) * D + d] = lam_max;
    }
  });
  Accumulator acc;
  for (int i = 0; i < P; ++i)
    for (int d = 0; d < D; ++d) {
      Witness w;
      w.z = pts[i];
      w.zeta = dirs[d];
      w.raw_value = raws[static_cast<size_t>(i) * D + d];
      acc.feed(margins[static_cast<size_t>(i) * D + d], w);
    }
  if (!strict) return finish("C2", acc, tol, resolution_note(plan));

  // strict variant: every sampled form must be negative definite with a
  // quantitative normalized margin
  ConditionReport rep;
  rep.condition = "C2'";
  rep.samples_checked = acc.checked;
  rep.worst_value = acc.worst;
  if (acc.worst >= tol.definite) {
    rep.verdict = Verdict::Pass;
    rep.note = resolution_note(plan) + "; definite margin " + std::to_string(tol.definite);
  } else {
    rep.verdict = Verdict::Fail;
    rep.witness = acc.witness;
    rep.note = "sampled form is not negative definite beyond the margin";
  }
  return rep;
}

ConditionReport check_C3(const MobilityModel& model, int boundary_samples, uint64_t seed,
                         const ConditionTolerances& tol) {
  if (model.c3_exempt())
    throw InputError("check_C3: model is flagged c3_exempt");
  const auto pts = sample_boundary(model.space(), boundary_samples, seed);
  Accumulator acc;
  for (const auto& z : pts) {
    const Matrix M = model.M(z);
    for (const auto& nu : model.space().boundary_normals(z, 1e-12)) {
      const double r = (M * nu).norm();
      Witness w;
      w.z = z;
      w.zeta = nu;
      w.raw_value = r;
      acc.feed((tol.c3_abs - r) / tol.c3_abs, w);
    }
  }
  ConditionReport rep;
  rep.condition = "C3";
  rep.samples_checked = acc.checked;
  rep.worst_value = acc.worst;
  if (acc.worst >= 0.0) {
    rep.verdict = Verdict::Pass;
    rep.note = "|M nu| <= " + std::to_string(tol.c3_abs) + " at " +
               std::to_string(boundary_samples) + " boundary states";
  } else {
    rep.verdict = Verdict::Fail;
    rep.witness = acc.witness;
    rep.note = "boundary flux does not vanish";
  }
  return rep;
}

namespace {

// directional derivative of L(z) = M(z) hess f(z) by central differences
struct ProductDerivative {
  const MobilityModel* model;
  const EnergyFunction* f;

  Matrix L(const Vector& z) const {
    return model->M(z) * f->hessian(*model, z);
  }
  Matrix DL(const Vector& z, const Vector& u) const {
    const double nu = u.norm();
    if (nu == 0.0) return Matrix::Zero(model->dim(), model->dim());
    const Vector e = u / nu;
    double h = 1e-5 * std::max(1.0, z.norm());
    h = std::min(h, 0.45 * model->space().interior_distance(z));
    return nu * (L(z + h * e) - L(z - h * e)) / (2.0 * h);
  }
};

}  // namespace

ConditionReport check_mccann(const MobilityModel& model, const EnergyFunction& f,
                             const SamplePlan& plan, const ConditionTolerances& tol) {
  const int n = model.dim();
  const auto pts = sample_interior(model.space(), plan);
  const auto dirs = sample_directions(n, plan);
  const ProductDerivative pd{&model, &f};
  const int P = static_cast<int>(pts.size());
  const int D = static_cast<int>(dirs.size());

  struct Slot {
    double margin;
    Vector v, beta;
    double raw;
  };
  std::vector<Slot> slots(static_cast<size_t>(P) * D);

  parallel_for(P, [&](int ip) {
    const Vector& z = pts[ip];
    const Matrix M = model.M(z);
    const Matrix L = pd.L(z);
    std::vector<Matrix> DMe(n), DLe(n);
    for (int r = 0; r < n; ++r) {
      DMe[r] = model.DM(z, Vector::Unit(n, r));
      DLe[r] = pd.DL(z, Vector::Unit(n, r));
    }
    for (int id = 0; id < D; ++id) {
      const Vector& zeta = dirs[id];
      Matrix DMz = Matrix::Zero(n, n), DLz = Matrix::Zero(n, n);
      for (int r = 0; r < n; ++r) {
        DMz += zeta[r] * DMe[r];
        DLz += zeta[r] * DLe[r];
      }
      const Vector Lzeta = L * zeta;
      const Matrix D2M_z_Lz = model.D2M(z, zeta, Lzeta);
      const Matrix DM_Lz = model.DM(z, Lzeta);

      auto q = [&](const Vector& u) {
        const Vector v = u.head(n);
        const Vector beta = u.tail(n);
        const Vector w = DMz * v + M * beta;
        double val = -0.5 * v.dot(D2M_z_Lz * v);
        val += beta.dot(L * (M * beta));
        val += beta.dot((L * DMz - DM_Lz) * v);
        val += v.dot(DLz * w);
        double last = 0.0;
        for (int r = 0; r < n; ++r) last += w[r] * v.dot(DLe[r] * zeta);
        val -= last;
        return val;
      };
      const Matrix Q = polarize(2 * n, q);
      Eigen::SelfAdjointEigenSolver<Matrix> es(Q);
      const double lam_min = es.eigenvalues().minCoeff();
      const double scale = 1.0 + es.eigenvalues().cwiseAbs().maxCoeff();
      Slot& s = slots[static_cast<size_t>(ip) * D + id];
      s.margin = lam_min / scale;
      s.raw = lam_min;
      int arg = 0;
      es.eigenvalues().minCoeff(&arg);
      s.v = es.eigenvectors().col(arg).head(n);
      s.beta = es.eigenvectors().col(arg).tail(n);
    }
  });

  Accumulator acc;
  for (int ip = 0; ip < P; ++ip)
    for (int id = 0; id < D; ++id) {
      const Slot& s = slots[static_cast<size_t>(ip) * D + id];
      Witness w;
      w.z = pts[ip];
      w.zeta = dirs[id];
      w.v = s.v;
      w.beta = s.beta;
      w.raw_value = s.raw;
      acc.feed(s.margin, w);
    }
  return finish("mccann", acc, tol, resolution_note(plan));
}

namespace {

// q1/q2 pairs probed per sampled (z, zeta): coordinate extremes plus seeded
// joint draws (the q1 = q2 coupling is probed alongside independent pairs)
std::vector<std::pair<Vector, Vector>> potential_q_pairs(int n, double R, uint64_t seed) {
  std::vector<std::pair<Vector, Vector>> out;
  for (int r = 0; r < n; ++r)
    for (double s1 : {R, -R})
      for (double s2 : {R, -R})
        out.emplace_back(s1 * Vector::Unit(n, r), s2 * Vector::Unit(n, r));
  uint64_t st = seed ? seed : 7;
  auto rnd = [&st]() {
    st ^= st << 13;
    st ^= st >> 7;
    st ^= st << 17;
    return 2.0 * (static_cast<double>(st % 100003) / 100003.0) - 1.0;
  };
  for (int k = 0; k < 4; ++k) {
    Vector a(n), b(n);
    for (int j = 0; j < n; ++j) {
      a[j] = rnd();
      b[j] = rnd();
    }
    if (a.norm() > 0) a *= R / a.norm();
    if (b.norm() > 0) b *= R / b.norm();
    out.emplace_back(a, b);
    out.emplace_back(a, a);  // coupled draw
  }
  return out;
}

Matrix potential_form_matrix(const MobilityModel& model, double alpha, const Vector& z,
                             const Vector& zeta, const Vector& q1, const Vector& q2) {
  const int n = model.dim();
  const Matrix M = model.M(z);
  const Matrix D2M_zz = model.D2M(z, zeta, zeta);
  const Matrix D2M_zMq1 = model.D2M(z, zeta, M * q1);
  const Matrix DM_Mq2 = model.DM(z, M * q2);
  std::vector<Matrix> D2M_ze(n);
  for (int r = 0; r < n; ++r) D2M_ze[r] = model.D2M(z, zeta, Vector::Unit(n, r));
  auto g = [&](const Vector& v) {
    const Vector Mv = M * v;
    double val = -0.5 * alpha * v.dot(D2M_zz * v);
    val += -0.5 * v.dot(D2M_zMq1 * v);
    double mid = 0.0;
    for (int r = 0; r < n; ++r) mid += Mv[r] * v.dot(D2M_ze[r] * q1);
    val += mid;
    val += v.dot(DM_Mq2 * v);
    return val;
  };
  return polarize(n, g);
}

}  // namespace

ConditionReport check_potential_convexity(const MobilityModel& model, double alpha,
                                          double R, double lambda, const SamplePlan& plan,
                                          const ConditionTolerances& tol) {
  if (alpha <= 0.0) throw InputError("potential convexity: alpha must be positive");
  if (R < 0.0) throw InputError("potential convexity: R must be nonnegative");
  const int n = model.dim();
  const auto pts = sample_interior(model.space(), plan);
  const auto dirs = sample_directions(n, plan);
  const auto qs = potential_q_pairs(n, R, plan.seed);
  const int P = static_cast<int>(pts.size());
  const int D = static_cast<int>(dirs.size());
  const int Qn = static_cast<int>(qs.size());

  std::vector<double> margins(static_cast<size_t>(P) * D * Qn);
  std::vector<double> raws(margins.size());
  parallel_for(P, [&](int ip) {
    const Vector& z = pts[ip];
    const Matrix M = model.M(z);
    for (int id = 0; id < D; ++id)
      for (int iq = 0; iq < Qn; ++iq) {
        const Matrix G = potential_form_matrix(model, alpha, z, dirs[id], qs[iq].first,
                                               qs[iq].second) -
                         lambda * M;
        Eigen::SelfAdjointEigenSolver<Matrix> es(G);
        const double lam_min = es.eigenvalues().minCoeff();
        const double scale = 1.0 + es.eigenvalues().cwiseAbs().maxCoeff();
        margins[(static_cast<size_t>(ip) * D + id) * Qn + iq] = lam_min / scale;
        raws[(static_cast<size_t>(ip) * D + id) * Qn + iq] = lam_min;
      }
  });

  Accumulator acc;
  for (int ip = 0; ip < P; ++ip)
    for (int id = 0; id < D; ++id)
      for (int iq = 0; iq < Qn; ++iq) {
        Witness w;
        w.z = pts[ip];
        w.zeta = dirs[id];
        w.raw_value = raws[(static_cast<size_t>(ip) * D + id) * Qn + iq];
        acc.feed(margins[(static_cast<size_t>(ip) * D + id) * Qn + iq], w);
      }
  ConditionReport rep = finish("potential-convexity", acc, tol, resolution_note(plan));
  rep.parameter = lambda;
  return rep;
}

double estimate_lambda(const MobilityModel& model, double alpha, double R,
                       const SamplePlan& plan) {
  const int n = model.dim();
  const auto pts = sample_interior(model.space(), plan);
  const auto dirs = sample_directions(n, plan);
  const auto qs = potential_q_pairs(n, R, plan.seed);
  std::vector<double> worst(pts.size(), std::numeric_limits<double>::infinity());
  parallel_for(static_cast<int>(pts.size()), [&](int ip) {
    const Vector& z = pts[ip];
    const Matrix M = model.M(z);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& zeta : dirs)
      for (const auto& q : qs) {
        const Matrix G = potential_form_matrix(model, alpha, z, zeta, q.first, q.second);
        Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(G, M);
        best = std::min(best, es.eigenvalues().minCoeff());
      }
    worst[ip] = best;
  });
  double lambda = std::numeric_limits<double>::infinity();
  for (double v : worst) lambda = std::min(lambda, v);
  return lambda;
}

double lambda_closed_form_decoupled(const MobilityModel& model, double alpha, double R) {
  if (!model.diagonal())
    throw InputError("closed-form lambda: model must be fully decoupled");
  double lam = 0.0;
  for (const auto& m : model.scalar_mobilities()) {
    const double c2 = m.c2_norm();
    lam = std::max(lam, c2 * R * (c2 * R / (8.0 * alpha) + 1.0));
  }
  return -lam;
}

ConditionReport check_diag_domination(const MobilityModel& model,
                                      const MobilityModel& reference,
                                      const std::vector<double>& K_grid,
                                      const SamplePlan& plan,
                                      const ConditionTolerances& tol) {
  if (!(model.space() == reference.space()))
    throw InputError("diag domination: models must share the state space");
  if (!reference.diagonal())
    throw InputError("diag domination: reference must be fully decoupled");
  const auto pts = sample_interior(model.space(), plan);
  std::vector<double> grid = K_grid;
  std::sort(grid.begin(), grid.end());

  ConditionReport rep;
  rep.condition = "diag-domination";
  rep.samples_checked = static_cast<long>(pts.size()) * static_cast<long>(grid.size());
  double best_worst = -std::numeric_limits<double>::infinity();
  std::optional<Witness> best_witness;
  for (double K : grid) {
    double worst = std::numeric_limits<double>::infinity();
    Witness w;
    for (const auto& z : pts) {
      const Matrix A = K * reference.M_inverse(z) - model.M_inverse(z);
      Eigen::SelfAdjointEigenSolver<Matrix> es(A);
      const double lam_min = es.eigenvalues().minCoeff();
      const double scale = 1.0 + es.eigenvalues().cwiseAbs().maxCoeff();
      if (lam_min / scale < worst) {
        worst = lam_min / scale;
        w.z = z;
        w.raw_value = lam_min;
      }
    }
    if (worst > best_worst) {
      best_worst = worst;
      best_witness = w;
    }
    if (worst > tol.pass) {  // strictly positive definite beyond round-off
      rep.verdict = Verdict::Pass;
      rep.parameter = K;
      rep.worst_value = worst;
      rep.note = "K = " + std::to_string(K) + " dominates at " + resolution_note(plan);
      return rep;
    }
  }
  rep.verdict = Verdict::Fail;
  rep.worst_value = best_worst;
  rep.witness = best_witness;
  rep.note = "no K in the grid renders A_K positive definite";
  return rep;
}

ConditionReport check_concavity_scalar(const ScalarMobility& m, int samples,
                                       const ConditionTolerances& tol) {
  const double lo = m.lo(), hi = m.hi();
  const double h = (hi - lo) / (samples + 1);
  double max_abs = 0.0;
  for (int i = 0; i <= samples + 1; ++i)
    max_abs = std::max(max_abs, std::abs(m.m(lo + i * h)));

  Accumulator acc;
  // positivity on the sampled interior
  for (int i = 1; i <= samples; ++i) {
    const double s = lo + i * h;
    Witness w;
    w.z = Vector::Constant(1, s);
    w.raw_value = m.m(s);
    acc.feed(m.m(s) / (1.0 + max_abs), w);
  }
  // boundary zeros
  for (double s : {lo, hi}) {
    Witness w;
    w.z = Vector::Constant(1, s);
    w.raw_value = m.m(s);
    acc.feed((1e-8 * (1.0 + max_abs) - std::abs(m.m(s))) / (1.0 + max_abs), w);
  }
  // concavity by second differences
  double max_dd = 0.0;
  for (int i = 1; i <= samples; ++i) {
    const double s = lo + i * h;
    max_dd = std::max(max_dd,
                      std::abs(m.m(s + h) - 2.0 * m.m(s) + m.m(s - h)) / (h * h));
  }
  for (int i = 1; i <= samples; ++i) {
    const double s = lo + i * h;
    const double dd = (m.m(s + h) - 2.0 * m.m(s) + m.m(s - h)) / (h * h);
    Witness w;
    w.z = Vector::Constant(1, s);
    w.raw_value = dd;
    acc.feed(-dd / (1.0 + max_dd), w);
  }
  ConditionTolerances tc = tol;
  tc.pass = std::max(tol.pass, 1e-7);  // absorbs round-off of the difference quotient
  return finish("concavity", acc, tc,
                "positive inside, zero at the ends, concave by second differences (" +
                    std::to_string(samples) + " samples)");
}

}  // namespace mmt
