#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmt/jko.hpp"
#include "mmt/mobility.hpp"
#include "mmt/sampling.hpp"

namespace mmt {

enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(Verdict v);

struct Witness {
  Vector z;
  Vector zeta;      // empty when not applicable
  Vector v, beta;   // eigenvector split (McCann / potential forms)
  double raw_value = 0.0;
};

/// Sampling certificate for one structural condition. worst_value is the
/// most negative normalized margin found (margins are divided by the scale
/// of the sampled form, which makes verdicts invariant under rescaling of
/// the direction set). A Pass never claims more than "no violation found at
/// this resolution"; the note says so explicitly.
struct ConditionReport {
  std::string condition;
  Verdict verdict = Verdict::Inconclusive;
  double worst_value = 0.0;
  std::optional<Witness> witness;
  long samples_checked = 0;
  double parameter = 0.0;  // family-specific: accepted K, lambda, epsilon
  std::string note;
};

struct ConditionTolerances {
  double pass = 1e-9;         // normalized
  double fail = 1e-6;         // normalized
  double definite = 1e-9;     // strict (C2') margin, normalized
  double c3_abs = 1e-8;       // absolute bound on |M nu|
};

/// Continuity up to the boundary, probed along segments toward the center.
ConditionReport check_C0(const MobilityModel& model, int boundary_samples,
                         uint64_t seed = 1,
                         const ConditionTolerances& tol = {});

/// Positive definiteness of M on sampled interior states.
ConditionReport check_C1(const MobilityModel& model, const SamplePlan& plan,
                         const ConditionTolerances& tol = {});

/// Negative semidefiniteness of D2M(z)[zeta,zeta] (strict: negative
/// definiteness with a quantitative margin).
ConditionReport check_C2(const MobilityModel& model, const SamplePlan& plan,
                         bool strict, const ConditionTolerances& tol = {});

/// M(z) nu = 0 on sampled boundary states; rejects c3-exempt models.
ConditionReport check_C3(const MobilityModel& model, int boundary_samples,
                         uint64_t seed = 1, const ConditionTolerances& tol = {});

/// Multi-component McCann condition for the internal energy with integrand f:
/// min eigenvalue of the symmetrized quadratic form in (v, beta) over sampled
/// (z, zeta). The derivative of L = M hess f is taken by central differences
/// of the product.
ConditionReport check_mccann(const MobilityModel& model, const EnergyFunction& f,
                             const SamplePlan& plan,
                             const ConditionTolerances& tol = {});

/// lambda-convexity form of the regularized potential energy: the n x n
/// quadratic form in v over sampled (z, zeta, q1, q2) with |q1|,|q2| <= R.
ConditionReport check_potential_convexity(const MobilityModel& model, double alpha,
                                          double R, double lambda,
                                          const SamplePlan& plan,
                                          const ConditionTolerances& tol = {});

/// Largest lambda passing the potential-convexity check on the sampled set
/// (minimal generalized eigenvalue of the form pair).
double estimate_lambda(const MobilityModel& model, double alpha, double R,
                       const SamplePlan& plan);

/// Closed-form bound for fully decoupled mobilities:
/// -max_j |m_j|_{C2} R (|m_j|_{C2} R / (8 alpha) + 1).
double lambda_closed_form_decoupled(const MobilityModel& model, double alpha, double R);

/// Smallest K in the grid with K M0(z)^{-1} - M(z)^{-1} positive definite at
/// every sampled state.
ConditionReport check_diag_domination(const MobilityModel& model,
                                      const MobilityModel& reference,
                                      const std::vector<double>& K_grid,
                                      const SamplePlan& plan,
                                      const ConditionTolerances& tol = {});

/// Positivity, boundary zeros, and concavity (second differences) of a
/// scalar mobility on its interval.
ConditionReport check_concavity_scalar(const ScalarMobility& m, int samples = 512,
                                       const ConditionTolerances& tol = {});

}  // namespace mmt
