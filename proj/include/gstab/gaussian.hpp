#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "gstab/space.hpp"

namespace gstab::gaussian {

struct McConfig {
  std::int64_t samples = 100000;
  std::uint64_t seed = 0;
};

// A norm estimate. Exact path: std_error = 0 and samples = 0. Monte Carlo
// path: samples > 0. std_error = 0 exactly when the value is exact (all-zero
// estimands short-circuit to the exact path in every norm, so a zero standard
// error never lies about Monte Carlo noise).
struct GaussianSumEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  bool exact = true;
};

// L^2(Omega)-norm of sum_k g_k x_k for independent standard Gaussians g_k and
// the columns x_k of `vectors`. Exact on l2 (the Frobenius norm); Monte Carlo
// through the dispatch kernels otherwise. Passing no McConfig requests the
// exact path and throws ExactPathUnavailable off l2.
GaussianSumEstimate gaussian_sum_norm(const Eigen::MatrixXcd& vectors, const SpaceSpec& space,
                                      const std::optional<McConfig>& mc);

// Rademacher variant: independent signs instead of Gaussians. The l2 exact
// path is the same Frobenius norm (signs are orthonormal in L^2(Omega) too).
GaussianSumEstimate rademacher_sum_norm(const Eigen::MatrixXcd& vectors, const SpaceSpec& space,
                                        const std::optional<McConfig>& mc);

// gamma-radonifying norm of the operator r: l2_d -> space, given as the m x d
// matrix of basis images. Equals gaussian_sum_norm of the columns; unitarily
// invariant in the domain.
GaussianSumEstimate gamma_norm(const Eigen::MatrixXcd& r, const SpaceSpec& space,
                               const std::optional<McConfig>& mc);

// Almost-summing norm: sup over finite orthonormal systems (h_k) of
// || sum g_k R h_k ||. The full basis attains the sup (projections contract
// the gamma norm), which the randomized search corroborates.
struct AlmostSummingResult {
  GaussianSumEstimate full_basis;
  double search_max = 0.0;
  int systems = 0;
  bool search_within_tolerance = true;
};

AlmostSummingResult almost_summing_norm(const Eigen::MatrixXcd& r, const SpaceSpec& space,
                                        const std::optional<McConfig>& mc, int systems = 24);

// Two-sided comparison record for the sequence bounds. `violated` means the
// left side exceeded the right beyond three combined standard errors plus
// rounding slack.
struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double lhs_std_error = 0.0;
  double rhs_std_error = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool violated = false;
};

// || sum_n g_n R f_n || <= c_hilbert * ||R||_gamma for a Hilbert sequence
// (f_n), the columns of f.
BoundCheck check_hilbert_sequence_bound(const Eigen::MatrixXcd& r, const Eigen::MatrixXcd& f,
                                        double c_hilbert, const SpaceSpec& space,
                                        const std::optional<McConfig>& mc);

// ||R restricted to span(f_n)||_gamma <= (1/c_bessel) || sum_n g_n R f_n ||
// for a Riesz sequence (f_n).
BoundCheck check_bessel_sequence_bound(const Eigen::MatrixXcd& r, const Eigen::MatrixXcd& f,
                                       double c_bessel, const SpaceSpec& space,
                                       const std::optional<McConfig>& mc);

}  // namespace gstab::gaussian
