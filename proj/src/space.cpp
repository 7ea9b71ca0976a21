#include "gstab/space.hpp"

#include <cmath>

namespace gstab {

SpaceSpec SpaceSpec::l2(int dim) {
  if (dim < 1) throw ValidationError("space dimension must be >= 1, got " + std::to_string(dim));
  return SpaceSpec{dim, NormKind::l2, 2.0};
}

SpaceSpec SpaceSpec::lp(int dim, double p) {
  if (dim < 1) throw ValidationError("space dimension must be >= 1, got " + std::to_string(dim));
  if (!(p >= 1.0)) throw ValidationError("lp norm requires p >= 1, got " + std::to_string(p));
  if (p == 2.0) throw ValidationError("p = 2 must be declared as l2, not lp");
  return SpaceSpec{dim, NormKind::lp, p};
}

double SpaceSpec::norm(const Eigen::VectorXcd& x) const {
  if (x.size() != dim) {
    throw DimensionMismatch("vector of size " + std::to_string(x.size()) +
                            " in space of dimension " + std::to_string(dim));
  }
  if (is_l2()) return x.norm();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) acc += std::pow(std::abs(x[j]), p);
  return std::pow(acc, 1.0 / p);
}

double SpaceSpec::l2_to_p() const {
  if (is_l2() || p >= 2.0) return 1.0;
  return std::pow(double(dim), 1.0 / p - 0.5);
}

double SpaceSpec::p_to_l2() const {
  if (is_l2() || p <= 2.0) return 1.0;
  return std::pow(double(dim), 0.5 - 1.0 / p);
}

}  // namespace gstab
