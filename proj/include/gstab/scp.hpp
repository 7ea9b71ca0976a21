#pragma once

#include <Eigen/Dense>
#include <optional>

#include "gstab/gaussian.hpp"
#include "gstab/semigroup.hpp"
#include "gstab/space.hpp"

namespace gstab::scp {

// Stochastic Cauchy problem dX = AX dt + B dW on the generator's space, with
// a d-dimensional driving noise.
struct ScpProblem {
  semigroup::Generator gen;
  Eigen::MatrixXcd b;

  ScpProblem(semigroup::Generator gen_in, Eigen::MatrixXcd b_in);
  int state_dim() const noexcept { return gen.dim(); }
  int noise_dim() const noexcept { return int(b.cols()); }
};

// gamma-norm of s -> T(s)B over [0, t_max]: the mild solution's covariance
// scale at the horizon. Exact on l2 as sqrt(trace) of the finite-horizon
// Gramian; Monte Carlo over the discretized orbit family otherwise. Finite
// for every horizon, stable or not.
struct SolutionNorm {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = true;
  double horizon = 0.0;
};

SolutionNorm solution_norm(const ScpProblem& prob, double t_max,
                           const std::optional<gaussian::McConfig>& mc);

// Existence of the mild solution on [0, t_max]. At finite dimension the
// finite-horizon norm is always finite, so `exists` records that fact
// constructively rather than assuming it.
struct SolutionExistence {
  bool exists = false;
  SolutionNorm norm;
};

SolutionExistence solution_exists(const ScpProblem& prob, double t_max,
                                  const std::optional<gaussian::McConfig>& mc);

// Stationary covariance Q solving A Q + Q A* = -B B*. NotStable when the
// spectral abscissa is >= 0.
Eigen::MatrixXcd invariant_covariance(const ScpProblem& prob);

// Existence and uniqueness of an invariant measure, decided on the reachable
// subspace: the measure exists when the driven dynamics decay, and the flag
// `unique` reports the unambiguous globally stable case (with neutral or
// unstable undriven directions several invariant measures can coexist).
struct InvariantMeasureReport {
  bool exists = false;
  bool unique = false;
  double gamma_norm = 0.0;  // meaningful only when exists
  double std_error = 0.0;
  bool exact = true;
  Eigen::MatrixXcd covariance;
  double reachable_abscissa = 0.0;
  int reachable_dim = 0;
};

InvariantMeasureReport invariant_measure_exists(const ScpProblem& prob,
                                                const std::optional<gaussian::McConfig>& mc);

// gamma-norm of s -> R(is, A)B over the whole real line,
// sqrt(int ||R(is)B||_HS^2 ds), by adaptive Simpson quadrature with the tails
// mapped through s -> 1/s onto finite intervals. Equals
// sqrt(2 pi) ||T(.)B||_{L^2} by Plancherel; both routes are reported.
struct FrequencyNorm {
  double value = 0.0;
  double time_domain_value = 0.0;
  double rel_gap = 0.0;
  double tail_bound = 0.0;  // norm contribution of the mapped tails
  int grid_points = 0;
};

FrequencyNorm resolvent_transform_norm(const ScpProblem& prob, double rel_tol = 1e-6);

// Complex stability radius 1 / sup_s ||R(is)||_2: every perturbation of
// operator norm below `margin` keeps the generator stable.
struct PerturbationMargin {
  double margin = 0.0;
  double axis_sup = 0.0;
  int grid_points = 0;
};

PerturbationMargin perturbation_margin(const semigroup::Generator& gen);

// Certified perturbation analysis of the invariant measure: contraction
// C = ||P|| sup ||R(is)|| < 1 keeps A + P stable with resolvent and
// frequency gamma-norm inflation at most 1/(1 - C), and the perturbed
// problem's invariant measure is re-derived from scratch. MarginExceeded
// when C >= 1.
struct PerturbationReport {
  double delta_margin = 0.0;
  double perturbation_norm = 0.0;
  double contraction_c = 0.0;
  double norm_inflation = 0.0;
  double base_axis_sup = 0.0;
  double perturbed_axis_sup = 0.0;
  bool axis_within = false;
  double base_transform_norm = 0.0;
  double perturbed_transform_norm = 0.0;
  bool transform_within = false;
  double covariance_shift = 0.0;  // ||Q' - Q||_2 / ||Q||_2
  InvariantMeasureReport perturbed_report;
};

PerturbationReport perturbed_invariant_measure_check(
    const ScpProblem& prob, const Eigen::MatrixXcd& p,
    const std::optional<gaussian::McConfig>& mc = std::nullopt);

// Solution-level perturbation theory: a right shift omega1 > s(A) + 1 is
// grown until sup_{Re lambda >= 0} ||R(lambda, A - omega1)|| ||P|| < 1, the
// Neumann factor sum_n (R(is, A - omega1) P)^n R(is, A - omega1) is checked
// against the directly inverted perturbed resolvent on a frequency grid, and
// finite-horizon solution norms for A and A + P are compared. Works for
// unstable generators; ShiftSearchFailed if no shift below the cap contracts.
struct SolutionPerturbationReport {
  double omega1 = 0.0;
  double halfplane_rbound = 0.0;  // sup over Re lambda >= 0, shifted generator
  double contraction = 0.0;       // halfplane_rbound * ||P||
  double perturbation_norm = 0.0;
  double neumann_max_rel_error = 0.0;
  int neumann_terms = 0;
  SolutionNorm base;
  SolutionNorm perturbed;
  double ratio = 0.0;
  double horizon = 0.0;
};

SolutionPerturbationReport bounded_perturbation_solution(
    const ScpProblem& prob, const Eigen::MatrixXcd& p, double t_max,
    const std::optional<gaussian::McConfig>& mc = std::nullopt);

// Largest right shift omega with A + omega I still stable, decided purely by
// the Lyapunov orbit-energy oracle (solve, then positive-definiteness), never
// by eigenvalues. Converges to the spectral gap; ShiftSearchFailed if the
// bisection bracket is invalid.
double lyapunov_decay_rate(const semigroup::Generator& gen, double rel_tol = 1e-9);

// The full stochastic Datko-Pazy certification: the resolvent chain, the
// stability radius, epsilon = min(epsilon0, margin)/2, finiteness of every
// basis orbit of the shifted semigroup e^{t(A + epsilon I)}, the
// eigenvalue-free decay rate, and a rank-one noise sweep of SCP(A + epsilon,
// x h*) whose invariant measures must all exist, with the sweep's largest
// gamma-norm checked against the shifted uniform orbit bound.
struct DatkoPazyCertificate {
  double epsilon = 0.0;
  semigroup::StabilityCertificate certificate;
  bool shifted_norms_finite = false;
  double margin = 0.0;
  double shifted_orbit_bound = 0.0;
  double decay_rate = 0.0;
  bool decay_consistent = false;
  double rank_one_max = 0.0;
  int rank_one_trials = 0;
  bool rank_one_within = false;
  bool rank_one_measures_exist = false;
};

DatkoPazyCertificate datko_pazy_certify(const semigroup::Generator& gen,
                                        const std::optional<gaussian::McConfig>& mc);

}  // namespace gstab::scp
