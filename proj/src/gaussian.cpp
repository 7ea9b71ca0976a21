#include "gstab/gaussian.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "gstab/errors.hpp"
#include "gstab/kernels.hpp"
#include "gstab/rng.hpp"

namespace gstab::gaussian {

using Eigen::MatrixXcd;

namespace {

enum class WeightKind { gaussian, rademacher };

void validate_family(const MatrixXcd& vectors, const SpaceSpec& space) {
  if (vectors.cols() < 1) throw EmptyFamily("weighted sum needs at least one vector");
  if (vectors.rows() != space.dim) {
    throw DimensionMismatch("family lives in dimension " + std::to_string(vectors.rows()) +
                            ", space has dimension " + std::to_string(space.dim));
  }
}

GaussianSumEstimate exact_l2(const MatrixXcd& vectors) {
  GaussianSumEstimate est;
  est.value = vectors.norm();  // E|| sum_k w_k x_k ||_2^2 = sum_k ||x_k||_2^2
  est.exact = true;
  return est;
}

GaussianSumEstimate mc_weighted_sum(const MatrixXcd& vectors, const SpaceSpec& space,
                                    const McConfig& mc, WeightKind kind) {
  if (mc.samples < 2) throw ValidationError("Monte Carlo needs at least 2 samples");
  const int n = int(vectors.cols());
  const int m = int(vectors.rows());

  // Family packed k-major for the kernels; imaginary parts dropped when the
  // family is real so the kernel skips that arithmetic entirely.
  std::vector<double> re(std::size_t(n) * m), im(std::size_t(n) * m);
  bool complex_family = false;
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < m; ++j) {
      re[std::size_t(k) * m + j] = vectors(j, k).real();
      im[std::size_t(k) * m + j] = vectors(j, k).imag();
      complex_family = complex_family || vectors(j, k).imag() != 0.0;
    }
  }
  const kernels::FamilyView view{re.data(), complex_family ? im.data() : nullptr, n, m};
  const kernels::NormSpec norm{space.is_l2() ? 2.0 : space.p};
  const auto kernel = kernels::active_kernel();

  // Fixed accumulation order in the sample index: the batch size is a pure
  // batching choice and every draw is keyed by (seed, sample, draw), so any
  // partition of this loop reproduces identical results.
  constexpr int kBatch = 256;
  std::vector<double> weights(std::size_t(n) * kBatch);
  std::vector<double> draws(std::size_t(n), 0.0);
  std::vector<double> out(std::size_t(kBatch), 0.0);
  double sum = 0.0, sumsq = 0.0;
  for (std::int64_t s0 = 0; s0 < mc.samples; s0 += kBatch) {
    const int bs = int(std::min<std::int64_t>(kBatch, mc.samples - s0));
    for (int sb = 0; sb < bs; ++sb) {
      if (kind == WeightKind::gaussian) {
        rng::sample_normals(mc.seed, std::uint64_t(s0 + sb), n, draws.data());
      } else {
        rng::sample_signs(mc.seed, std::uint64_t(s0 + sb), n, draws.data());
      }
      for (int k = 0; k < n; ++k) weights[std::size_t(k) * bs + sb] = draws[std::size_t(k)];
    }
    kernel(view, norm, weights.data(), bs, out.data());
    for (int sb = 0; sb < bs; ++sb) {
      sum += out[std::size_t(sb)];
      sumsq += out[std::size_t(sb)] * out[std::size_t(sb)];
    }
  }

  const double s_count = double(mc.samples);
  const double mean = sum / s_count;
  const double var_mean = std::max(0.0, (sumsq / s_count - mean * mean) / (s_count - 1.0));

  GaussianSumEstimate est;
  est.value = std::sqrt(std::max(mean, 0.0));
  // Delta method through sqrt: se(sqrt(m)) = se(m) / (2 sqrt(m)).
  est.std_error = mean > 0.0 ? std::sqrt(var_mean) / (2.0 * est.value) : 0.0;
  est.samples = mc.samples;
  est.seed = mc.seed;
  est.exact = false;
  return est;
}

GaussianSumEstimate weighted_sum_norm(const MatrixXcd& vectors, const SpaceSpec& space,
                                      const std::optional<McConfig>& mc, WeightKind kind) {
  validate_family(vectors, space);
  if (vectors.cwiseAbs().maxCoeff() == 0.0) {
    // Identically zero in every norm; exact regardless of path so that a zero
    // standard error always means "no Monte Carlo noise".
    return GaussianSumEstimate{};
  }
  if (kind == WeightKind::rademacher && vectors.cols() == 1) {
    // |eps| = 1 makes the single-vector sum deterministic in any norm; report
    // it exactly rather than as a zero-variance Monte Carlo run.
    GaussianSumEstimate est;
    est.value = space.norm(vectors.col(0));
    return est;
  }
  if (!mc.has_value()) {
    if (!space.is_l2()) {
      throw ExactPathUnavailable("closed-form Gaussian sums exist only on l2; pass a McConfig");
    }
    return exact_l2(vectors);
  }
  return mc_weighted_sum(vectors, space, *mc, kind);
}

// Orthonormal basis of the column span, rank decided at `tol` against the
// largest pivot.
MatrixXcd span_basis(const MatrixXcd& f, double tol) {
  Eigen::ColPivHouseholderQR<MatrixXcd> qr(f);
  qr.setThreshold(tol);
  const auto rank = qr.rank();
  if (rank == 0) return MatrixXcd(f.rows(), 0);
  MatrixXcd q = qr.householderQ() * MatrixXcd::Identity(f.rows(), rank);
  return q;
}

BoundCheck make_check(const GaussianSumEstimate& lhs, double rhs_factor,
                      const GaussianSumEstimate& rhs) {
  BoundCheck bc;
  bc.lhs = lhs.value;
  bc.lhs_std_error = lhs.std_error;
  bc.rhs = rhs_factor * rhs.value;
  bc.rhs_std_error = rhs_factor * rhs.std_error;
  bc.margin = bc.rhs - bc.lhs;
  const double noise = 3.0 * std::hypot(bc.lhs_std_error, bc.rhs_std_error);
  const double slack = 1e-12 * std::max(1.0, std::max(bc.lhs, bc.rhs));
  bc.violated = bc.lhs - bc.rhs > noise + slack;
  return bc;
}

}  // namespace

GaussianSumEstimate gaussian_sum_norm(const MatrixXcd& vectors, const SpaceSpec& space,
                                      const std::optional<McConfig>& mc) {
  return weighted_sum_norm(vectors, space, mc, WeightKind::gaussian);
}

GaussianSumEstimate rademacher_sum_norm(const MatrixXcd& vectors, const SpaceSpec& space,
                                        const std::optional<McConfig>& mc) {
  return weighted_sum_norm(vectors, space, mc, WeightKind::rademacher);
}

GaussianSumEstimate gamma_norm(const MatrixXcd& r, const SpaceSpec& space,
                               const std::optional<McConfig>& mc) {
  return gaussian_sum_norm(r, space, mc);
}

AlmostSummingResult almost_summing_norm(const MatrixXcd& r, const SpaceSpec& space,
                                        const std::optional<McConfig>& mc, int systems) {
  if (systems < 1) throw ValidationError("almost-summing search needs at least one system");
  AlmostSummingResult res;
  res.full_basis = gamma_norm(r, space, mc);
  res.systems = systems;

  const int d = int(r.cols());
  const std::uint64_t base = mc ? mc->seed : 0;
  rng::Stream st(rng::derive_seed(base, "almost-summing-search"));
  double worst_noise = res.full_basis.std_error;
  for (int i = 0; i < systems; ++i) {
    const int j = 1 + int(st.uniform_int(0, d - 1));
    MatrixXcd g(d, j);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < j; ++b) g(a, b) = std::complex<double>(st.normal(), st.normal());
    const MatrixXcd on = span_basis(g, 1e-10);
    std::optional<McConfig> sub = mc;
    if (sub) sub->seed = rng::derive_seed(base, "almost-summing-" + std::to_string(i));
    const auto est = gaussian_sum_norm(r * on, space, sub);
    res.search_max = std::max(res.search_max, est.value);
    worst_noise = std::max(worst_noise, est.std_error);
  }
  res.search_within_tolerance =
      res.search_max <=
      res.full_basis.value + 3.0 * std::hypot(res.full_basis.std_error, worst_noise) +
          1e-12 * std::max(1.0, res.full_basis.value);
  return res;
}

BoundCheck check_hilbert_sequence_bound(const MatrixXcd& r, const MatrixXcd& f, double c_hilbert,
                                        const SpaceSpec& space,
                                        const std::optional<McConfig>& mc) {
  if (!(c_hilbert > 0.0)) throw ValidationError("Hilbert-sequence constant must be positive");
  if (r.cols() != f.rows()) {
    throw DimensionMismatch("operator domain dimension " + std::to_string(r.cols()) +
                            " does not match sequence dimension " + std::to_string(f.rows()));
  }
  std::optional<McConfig> lhs_mc = mc, rhs_mc = mc;
  if (mc) {
    lhs_mc->seed = rng::derive_seed(mc->seed, "hilbert-lhs");
    rhs_mc->seed = rng::derive_seed(mc->seed, "hilbert-rhs");
  }
  const auto lhs = gaussian_sum_norm(r * f, space, lhs_mc);
  const auto rhs = gamma_norm(r, space, rhs_mc);
  return make_check(lhs, c_hilbert, rhs);
}

BoundCheck check_bessel_sequence_bound(const MatrixXcd& r, const MatrixXcd& f, double c_bessel,
                                       const SpaceSpec& space, const std::optional<McConfig>& mc) {
  if (!(c_bessel > 0.0)) throw ValidationError("Riesz-sequence constant must be positive");
  if (r.cols() != f.rows()) {
    throw DimensionMismatch("operator domain dimension " + std::to_string(r.cols()) +
                            " does not match sequence dimension " + std::to_string(f.rows()));
  }
  const MatrixXcd on = span_basis(f, 1e-10);
  if (on.cols() == 0) throw DegenerateFamily("sequence spans the zero subspace");

  std::optional<McConfig> lhs_mc = mc, rhs_mc = mc;
  if (mc) {
    lhs_mc->seed = rng::derive_seed(mc->seed, "bessel-lhs");
    rhs_mc->seed = rng::derive_seed(mc->seed, "bessel-rhs");
  }
  const auto lhs = gamma_norm(r * on, space, lhs_mc);
  const auto rhs = gaussian_sum_norm(r * f, space, rhs_mc);
  return make_check(lhs, 1.0 / c_bessel, rhs);
}

}  // namespace gstab::gaussian
