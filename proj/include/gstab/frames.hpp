#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gstab/errors.hpp"

namespace gstab::frames {

// Exponential system f_n(t) = e^{-a t + 2 pi i (n + rho) t} on [0, inf),
// n in [n_min, n_max], as elements of L^2(0, inf). The decay a must be
// positive; rho is an arbitrary frequency offset.
struct ExponentialFamily {
  double a;
  double rho;
  int n_min;
  int n_max;

  ExponentialFamily(double a, double rho, int n_min, int n_max);
  int size() const noexcept { return n_max - n_min + 1; }
  std::vector<int> all_indices() const;
};

// A family known only through values on a quadrature grid. `values` holds one
// column per member evaluated at `nodes`; `weights` are the quadrature
// weights; `max_frequency` (cycles per unit time) drives the Nyquist guard.
struct SampledFamily {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  Eigen::MatrixXcd values;
  double max_frequency = 0.0;
};

enum class FrameMethod { gram, cck, closed_form };

const char* to_string(FrameMethod m) noexcept;

// Upper (Hilbert/Bessel-sequence) and lower (Riesz-sequence) frame constants:
// c_hilbert^2 and c_bessel^2 are the extreme eigenvalues of the Gram matrix.
struct FrameConstants {
  double c_hilbert = 0.0;
  double c_bessel = 0.0;
  FrameMethod method = FrameMethod::gram;
};

// Gram matrix <f_{n_u}, f_{n_v}> (inner product conjugate-linear in the first
// argument) from the analytic formula 1/(2a - 2 pi i (n_v - n_u)). The offset
// rho cancels in the conjugate products and does not appear.
Eigen::MatrixXcd gram_matrix(const ExponentialFamily& fam, const std::vector<int>& indices);

// Quadrature Gram of a sampled family.
Eigen::MatrixXcd gram_matrix(const SampledFamily& fam);

// Frame constants from a Gram matrix spectrum.
FrameConstants frame_constants_gram(const Eigen::MatrixXcd& gram);

// Periodization F(t) = sum_{k=0..K} |f(t+k)|^2 of the window f = e^{-a t} on
// t in [0, 1), evaluated as a literal term sum. The infinite-sum relative
// truncation error is exactly e^{-2a(K+1)}.
double f_function(const ExponentialFamily& fam, double t, int K);

// Smallest K making the relative truncation error at most tail_tol.
int f_truncation_for(double a, double tail_tol);

// Frame constants through ess inf / ess sup of F over a uniform grid on
// [0, 1). The returned values carry a certified relative enclosure from the
// Lipschitz bound |F'| <= 2a F(0); GridTooCoarse when the enclosure is wider
// than rel_tol.
FrameConstants frame_constants_cck(const ExponentialFamily& fam, int grid_size,
                                   double rel_tol = 1e-2, double tail_tol = 1e-13);

// Closed forms for the exponential family: c_hilbert^2 = e^{2a}/(e^{2a}-1),
// c_bessel^2 = 1/(e^{2a}-1).
FrameConstants exponential_family_constants(double a);

// Uniform Simpson sampling of the family on [0, t_max]. The point count is
// forced odd; sampling below the Nyquist rate of the fastest member throws
// GridTooCoarse.
SampledFamily sample_family(const ExponentialFamily& fam, double t_max, int points);

// Two published closed-form candidates for c_bessel^2 disagree by a factor
// e^{-2a}. The adjudication computes both, measures the truncated-Gram minimal
// eigenvalue, and selects the candidate the spectrum converges to.
struct BesselAdjudication {
  double candidate_direct = 0.0;   // e^{-2a}/(e^{2a}-1)
  double candidate_essinf = 0.0;   // 1/(e^{2a}-1)
  double gram_lambda_min = 0.0;
  int gram_size = 0;
  double selected_cb2 = 0.0;
  double discrepancy_factor = 0.0;
};

BesselAdjudication adjudicate_bessel_constant(double a, int gram_size);

}  // namespace gstab::frames
