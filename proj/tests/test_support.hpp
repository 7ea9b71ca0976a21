#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "gstab/rng.hpp"

namespace gstab::testing {

// Random test instances. These run on the Stream wrapper, never on the keyed
// measurement streams, so instance generation cannot collide with estimator
// draws.

inline Eigen::MatrixXcd random_complex_matrix(rng::Stream& st, int rows, int cols) {
  Eigen::MatrixXcd a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = std::complex<double>(st.normal(), st.normal());
  return a;
}

inline Eigen::MatrixXd random_real_matrix(rng::Stream& st, int rows, int cols) {
  Eigen::MatrixXd a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = st.normal();
  return a;
}

inline Eigen::VectorXcd random_complex_vector(rng::Stream& st, int n) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = std::complex<double>(st.normal(), st.normal());
  return v;
}

// Hurwitz matrix with spectral abscissa <= -margin: random dense matrix shifted
// left by its numerically computed abscissa plus the margin.
inline Eigen::MatrixXcd random_hurwitz_matrix(rng::Stream& st, int m, double margin,
                                              bool real = false) {
  Eigen::MatrixXcd a = real ? Eigen::MatrixXcd(random_real_matrix(st, m, m))
                            : random_complex_matrix(st, m, m);
  const double s = Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(a, false)
                       .eigenvalues()
                       .real()
                       .maxCoeff();
  a -= (s + margin) * Eigen::MatrixXcd::Identity(m, m);
  return a;
}

}  // namespace gstab::testing
