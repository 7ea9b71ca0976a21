#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "gstab/gaussian.hpp"
#include "gstab/space.hpp"

namespace gstab::semigroup {

// Universal constant of the Laplace-transform R-bound theorem:
// 2 pi e^{2 pi} / (e^{2 pi} - 1).
double laplace_rbound_constant();

// Generator of the matrix semigroup t -> e^{tA} acting on `space`. The
// spectrum is computed eagerly; spectral_abscissa is its largest real part.
struct Generator {
  Eigen::MatrixXcd a;
  SpaceSpec space;
  Eigen::VectorXcd spectrum;
  double spectral_abscissa = 0.0;

  Generator(Eigen::MatrixXcd a_in, SpaceSpec space_in);
  int dim() const noexcept { return int(a.rows()); }
};

// e^{tA} for t >= 0.
Eigen::MatrixXcd expm(const Generator& gen, double t);

// Largest real part of the spectrum of A.
double spectral_abscissa(const Generator& gen);

// (lambda - A)^{-1}. SpectrumHit when lambda sits within `tol` of the
// spectrum (relative to the matrix scale).
Eigen::MatrixXcd resolvent(const Generator& gen, std::complex<double> lambda, double tol = 1e-12);

// Orbit t -> e^{tA} x sampled on a uniform Simpson grid; `values` column j is
// the orbit at node j. Built by one exact short-step exponential and node
// recurrence.
struct DiscretizedOrbit {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  Eigen::MatrixXcd values;
  double step = 0.0;
};

DiscretizedOrbit discretize_orbit(const Generator& gen, const Eigen::VectorXcd& x, double t_max,
                                  int points);

// Laplace transform of a discretized orbit at Re(lambda) >= 0. GridTooCoarse
// when the grid undersamples the requested frequency.
Eigen::VectorXcd laplace_transform(const DiscretizedOrbit& orbit, std::complex<double> lambda);

// gamma-norm of the orbit t -> e^{tA} x as an operator L^2(R_+) -> E. Exact
// on l2 through the Lyapunov observability Gramian; Monte Carlo over the
// discretized orbit otherwise. NotStable when the spectral abscissa is >= 0.
gaussian::GaussianSumEstimate orbit_gamma_norm(const Generator& gen, const Eigen::VectorXcd& x,
                                               const std::optional<gaussian::McConfig>& mc);

// M = sup_{||x|| <= 1} of the orbit gamma-norm. `value` is always a certified
// upper bound (exact on l2); `lower` comes from directional search and equals
// `value` on l2.
struct UniformOrbitBound {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool exact = true;
};

UniformOrbitBound uniform_orbit_bound(const Generator& gen,
                                      const std::optional<gaussian::McConfig>& mc,
                                      int directions = 8);

// R-bound of a finite operator family. On l2 this is exactly the largest
// operator norm; on lp the report is an MC Rademacher lower estimate plus the
// norm-equivalence upper bound dim^{|1/2 - 1/p|} * sup ||T||_2.
struct RBoundEstimate {
  double lower = 0.0;
  double upper = 0.0;
  double lower_std_error = 0.0;
  bool exact = true;
  int trials = 0;
};

RBoundEstimate rbound_estimate(const std::vector<Eigen::MatrixXcd>& ops, const SpaceSpec& space,
                               const std::optional<gaussian::McConfig>& mc, int trials = 8);

// sup of ||R(re + i s)||_2 over the vertical line, by a symmetric
// linear-core/log-tail grid with midpoint refinement and an explicit tail
// bound; deterministic. SpectrumHit if the line meets the spectrum.
double sup_resolvent_norm_on_line(const Generator& gen, double re, double rel_tol = 5e-3,
                                  int* grid_points = nullptr);

// Checks the Laplace-transform R-bound theorem for Theta = the semigroup
// itself: the family {R(lambda): Re lambda = delta} on a frequency grid
// against C * ||Theta||_gamma / sqrt(delta), plus interior samples (the sup
// over the closed half-plane lives on the boundary).
struct LaplaceRboundReport {
  double delta = 0.0;
  RBoundEstimate rbound;
  double theta_gamma_norm = 0.0;
  double theta_std_error = 0.0;
  double bound = 0.0;
  double interior_max = 0.0;
  int grid_points = 0;
  bool pass = false;
};

LaplaceRboundReport rbound_laplace_check(const Generator& gen, double delta,
                                         const std::optional<gaussian::McConfig>& mc,
                                         int im_points = 65, int interior_points = 16);

// Gaussian resolvent estimate along the vertical lattice
// lambda_n = sigma - (n + rho) delta i, |n| <= n_half:
// gamma-norm of (R(lambda_n) y)_n against sqrt(C/delta) * M * ||y||.
struct ResolventGammaCheck {
  gaussian::BoundCheck check;
  double orbit_bound_m = 0.0;
  int family_size = 0;
};

ResolventGammaCheck resolvent_gamma_estimate(const Generator& gen, const Eigen::VectorXcd& y,
                                             double sigma, double delta, double rho, int n_half,
                                             const std::optional<gaussian::McConfig>& mc);

// One certified vertical line inside the stability strip: the measured sup of
// the resolvent norm on Re lambda = -epsilon against the Neumann posterior
// bound 1/(epsilon0 - epsilon).
struct LineRBound {
  double epsilon = 0.0;
  double grid_sup = 0.0;
  double posterior_bound = 0.0;
  bool within = false;
};

struct CertificateConfig {
  std::vector<double> delta_ladder;                      // empty: auto geometric ladder
  std::vector<double> epsilon_fractions{0.25, 0.5, 0.75};
  double line_rel_tol = 5e-3;
};

// The stochastic Datko-Pazy certification chain: M -> c = C M ->
// epsilon0 = 1/(4 c^2) -> resolvent control across and left of the imaginary
// axis. ConservativenessViolation if the numerical abscissa contradicts the
// certificate.
struct StabilityCertificate {
  double orbit_bound_m = 0.0;
  double c = 0.0;
  double epsilon0 = 0.0;
  double s_numeric = 0.0;
  std::vector<std::pair<double, double>> rbound_profile;  // (delta, line sup)
  std::vector<LineRBound> line_rbound;
};

StabilityCertificate resolvent_rbound_datko(const Generator& gen, const CertificateConfig& config,
                                            const std::optional<gaussian::McConfig>& mc);

// Neumann continuation of the resolvent across the strip around the axis:
// R(alpha + i beta) = sum_n (epsilon0 - alpha)^n R(epsilon0 + i beta)^{n+1},
// valid on both sides of the expansion line Re lambda = epsilon0 as long as
// |epsilon0 - alpha| ||R(epsilon0 + i beta)|| < 1 (the certificate guarantees
// this for alpha in (-epsilon0, 3 epsilon0)). SeriesDiverges when the
// contraction ratio reaches 1.
struct NeumannResult {
  Eigen::MatrixXcd value;
  double ratio = 0.0;
  double posterior_bound = 0.0;
  int terms = 0;
};

NeumannResult neumann_resolvent(const Generator& gen, std::complex<double> lambda, double epsilon0,
                                int terms);

}  // namespace gstab::semigroup
