#ifdef __x86_64__

#include <immintrin.h>

#include "kernels_detail.hpp"

namespace gstab::kernels {

namespace {

// Four samples per lane-group, same operation order as the scalar reference:
// broadcast x_k, multiply by four consecutive weights, add. _mm256_sqrt_pd and
// the separate mul/add are correctly rounded, so every lane matches the
// scalar path bitwise.
inline __m256d modulus_pow4(__m256d m2, const detail::PNormPlan& pl) {
  if (pl.l2) return m2;
  if (pl.integral) {
    __m256d r = (pl.ip & 1) ? _mm256_sqrt_pd(m2) : m2;
    for (int i = (pl.ip & 1) ? 0 : 1; i < pl.ip / 2; ++i) r = _mm256_mul_pd(r, m2);
    return r;
  }
  alignas(32) double t[4];
  alignas(32) double o[4];
  _mm256_store_pd(t, m2);
  for (int q = 0; q < 4; ++q) o[q] = std::pow(t[q], 0.5 * pl.p);
  return _mm256_load_pd(o);
}

void avx2_block(const FamilyView& f, const NormSpec& norm, const double* weights,
                int batch, double* out) {
  const auto pl = detail::PNormPlan::make(norm.p);
  int s = 0;
  for (; s + 4 <= batch; s += 4) {
    __m256d total = _mm256_setzero_pd();
    for (int j = 0; j < f.m; ++j) {
      __m256d acc_re = _mm256_setzero_pd();
      __m256d acc_im = _mm256_setzero_pd();
      for (int k = 0; k < f.n; ++k) {
        const __m256d w = _mm256_loadu_pd(weights + std::size_t(k) * batch + s);
        const __m256d xr = _mm256_set1_pd(f.re[std::size_t(k) * f.m + j]);
        acc_re = _mm256_add_pd(acc_re, _mm256_mul_pd(w, xr));
        if (f.im) {
          const __m256d xi = _mm256_set1_pd(f.im[std::size_t(k) * f.m + j]);
          acc_im = _mm256_add_pd(acc_im, _mm256_mul_pd(w, xi));
        }
      }
      const __m256d m2 =
          f.im ? _mm256_add_pd(_mm256_mul_pd(acc_re, acc_re), _mm256_mul_pd(acc_im, acc_im))
               : _mm256_mul_pd(acc_re, acc_re);
      total = _mm256_add_pd(total, modulus_pow4(m2, pl));
    }
    if (pl.l2) {
      _mm256_storeu_pd(out + s, total);
    } else {
      alignas(32) double t[4];
      _mm256_store_pd(t, total);
      for (int q = 0; q < 4; ++q) out[s + q] = std::pow(t[q], 2.0 / pl.p);
    }
  }
  for (; s < batch; ++s) {
    out[s] = detail::weighted_sum_pnorm_one(f, pl, weights, batch, s);
  }
}

}  // namespace

BlockFn avx2_kernel() noexcept { return &avx2_block; }

}  // namespace gstab::kernels

#endif  // __x86_64__
