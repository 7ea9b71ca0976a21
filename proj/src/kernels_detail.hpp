#pragma once

#include <cmath>
#include <cstddef>

#include "gstab/kernels.hpp"

namespace gstab::kernels::detail {

// Precomputed shape of |z|^p evaluation. Integer p uses sqrt + multiplies
// only, which every lane of the AVX2 path reproduces exactly; fractional p
// falls back to scalar std::pow per lane.
struct PNormPlan {
  double p = 2.0;
  int ip = 2;
  bool integral = true;
  bool l2 = true;

  static PNormPlan make(double p) {
    PNormPlan pl;
    pl.p = p;
    pl.l2 = (p == 2.0);
    pl.integral = !pl.l2 && p == std::floor(p) && p <= 64.0;
    pl.ip = pl.integral ? int(p) : 0;
    return pl;
  }
};

// |z|^p from m2 = |z|^2.
inline double modulus_pow(double m2, const PNormPlan& pl) {
  if (pl.l2) return m2;
  if (pl.integral) {
    double r = (pl.ip & 1) ? std::sqrt(m2) : m2;
    for (int i = (pl.ip & 1) ? 0 : 1; i < pl.ip / 2; ++i) r *= m2;
    return r;
  }
  return std::pow(m2, 0.5 * pl.p);
}

// One sample of the weighted-sum p-norm; the reference semantics every kernel
// variant must match bit for bit.
inline double weighted_sum_pnorm_one(const FamilyView& f, const PNormPlan& pl,
                                     const double* weights, int batch, int s) {
  double total = 0.0;
  for (int j = 0; j < f.m; ++j) {
    double acc_re = 0.0;
    double acc_im = 0.0;
    for (int k = 0; k < f.n; ++k) {
      const double w = weights[std::size_t(k) * batch + s];
      acc_re += w * f.re[std::size_t(k) * f.m + j];
      if (f.im) acc_im += w * f.im[std::size_t(k) * f.m + j];
    }
    const double m2 = f.im ? acc_re * acc_re + acc_im * acc_im : acc_re * acc_re;
    total += modulus_pow(m2, pl);
  }
  if (pl.l2) return total;
  return std::pow(total, 2.0 / pl.p);
}

}  // namespace gstab::kernels::detail
