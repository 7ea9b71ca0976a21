#pragma once

#include <Eigen/Dense>

#include "gstab/errors.hpp"

namespace gstab {

// The Banach space norms are measured in: C^m under the Euclidean norm or an
// lp norm. p = 2 must be spelled l2; that keeps the exact-vs-Monte-Carlo path
// split unambiguous downstream (Euclidean norms admit closed-form Gaussian
// sums, general lp norms do not).
enum class NormKind { l2, lp };

struct SpaceSpec {
  int dim = 0;
  NormKind kind = NormKind::l2;
  double p = 2.0;

  static SpaceSpec l2(int dim);
  static SpaceSpec lp(int dim, double p);

  bool is_l2() const noexcept { return kind == NormKind::l2; }

  double norm(const Eigen::VectorXcd& x) const;

  // Norm equivalence against l2: ||x||_p <= l2_to_p() * ||x||_2 and
  // ||x||_2 <= p_to_l2() * ||x||_p, both sharp on C^dim.
  double l2_to_p() const;
  double p_to_l2() const;
};

}  // namespace gstab
