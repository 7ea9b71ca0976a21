#pragma once

#include <Eigen/Dense>

namespace gstab::linalg {

// Matrix exponential, Higham scaling-and-squaring with Pade approximants of
// order 3/5/7/9/13 chosen by the 1-norm.
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a);

// Spectral abscissa ingredients: eigenvalues with solver failure mapped to the
// toolkit error taxonomy.
Eigen::VectorXcd eigenvalues(const Eigen::MatrixXcd& a);

// Operator norm on Euclidean space (largest singular value).
double operator_norm2(const Eigen::MatrixXcd& a);

bool is_hermitian(const Eigen::MatrixXcd& a, double tol);

// Hermitian square root of a PSD matrix; eigenvalues in [-clamp, clamp] are
// treated as zero, anything below -clamp is an error.
Eigen::MatrixXcd sqrt_psd(const Eigen::MatrixXcd& g, double clamp = 1e-12);

// Solves A* X + X A = -C for Hermitian C by complex Schur reduction and a
// triangular column sweep. Solvable whenever no two eigenvalues of A satisfy
// conj(mu) + lambda = 0; Hurwitz A always qualifies. The result is
// Hermitianized and residual-checked.
Eigen::MatrixXcd lyapunov_adjoint(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& c);

// Solves A X + X A* = -C (the controllability-Gramian orientation).
Eigen::MatrixXcd lyapunov(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& c);

// int_0^T e^{tA} B B* e^{tA*} dt by the Van Loan block-exponential identity;
// exact up to the expm, no quadrature involved.
Eigen::MatrixXcd finite_horizon_gramian(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                                        double t);

}  // namespace gstab::linalg
