#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "gstab/errors.hpp"
#include "gstab/linalg.hpp"
#include "test_support.hpp"

using namespace gstab;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using std::complex;

namespace {

double rel_err(const MatrixXcd& got, const MatrixXcd& want) {
  return (got - want).norm() / std::max(1.0, want.norm());
}

// Truncated Taylor series; a legitimate oracle when ||A|| <= 1 (remainder
// below 1/30! of the leading scale).
MatrixXcd expm_taylor(const MatrixXcd& a) {
  MatrixXcd term = MatrixXcd::Identity(a.rows(), a.cols());
  MatrixXcd sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = (term * a / double(k)).eval();
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("expm on diagonal and nilpotent matrices") {
  MatrixXcd d = MatrixXcd::Zero(3, 3);
  d(0, 0) = complex<double>(-1.0, 2.0);
  d(1, 1) = complex<double>(0.5, 0.0);
  d(2, 2) = complex<double>(0.0, -3.0);
  MatrixXcd ed = linalg::expm(d);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(ed(i, i) - std::exp(d(i, i))) < 1e-13);
  }
  CHECK(std::abs(ed(0, 1)) < 1e-14);

  MatrixXcd nil = MatrixXcd::Zero(2, 2);
  nil(0, 1) = 1.0;
  MatrixXcd en = linalg::expm(nil);
  CHECK(std::abs(en(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(en(0, 1) - 1.0) < 1e-15);
  CHECK(std::abs(en(1, 0)) < 1e-15);
}

TEST_CASE("expm matches the rotation closed form") {
  const double th = 1.3;
  MatrixXcd a = MatrixXcd::Zero(2, 2);
  a(0, 1) = -th;
  a(1, 0) = th;
  MatrixXcd e = linalg::expm(a);
  CHECK(std::abs(e(0, 0) - std::cos(th)) < 1e-14);
  CHECK(std::abs(e(0, 1) + std::sin(th)) < 1e-14);
  CHECK(std::abs(e(1, 0) - std::sin(th)) < 1e-14);
  CHECK(std::abs(e(1, 1) - std::cos(th)) < 1e-14);
}

TEST_CASE("expm agrees with the Taylor oracle across Pade branches") {
  rng::Stream st(31);
  // Scales chosen to land in each order bucket and past the squaring cutoff.
  for (const double scale : {0.005, 0.1, 0.5, 1.5, 4.0, 20.0}) {
    MatrixXcd a = testing::random_complex_matrix(st, 5, 5);
    a *= scale / a.cwiseAbs().colwise().sum().maxCoeff();
    // Oracle evaluated at a/2^k with ||a/2^k|| <= 0.5, then squared back up;
    // squaring a matrix is independent of the Pade machinery under test.
    int k = 0;
    MatrixXcd small = a;
    while (small.cwiseAbs().colwise().sum().maxCoeff() > 0.5) {
      small /= 2.0;
      ++k;
    }
    MatrixXcd want = expm_taylor(small);
    for (int i = 0; i < k; ++i) want = want * want;
    CHECK(rel_err(linalg::expm(a), want) < 1e-11);
  }
}

TEST_CASE("expm inverse and semigroup identities") {
  rng::Stream st(37);
  MatrixXcd a = testing::random_complex_matrix(st, 6, 6);
  MatrixXcd e = linalg::expm(a);
  MatrixXcd einv = linalg::expm(MatrixXcd(-a));
  CHECK(rel_err(e * einv, MatrixXcd::Identity(6, 6)) < 1e-10);
  MatrixXcd half = linalg::expm(MatrixXcd(0.5 * a));
  CHECK(rel_err(half * half, e) < 1e-10);
}

TEST_CASE("expm agrees with the eigendecomposition oracle") {
  rng::Stream st(41);
  MatrixXcd a = testing::random_complex_matrix(st, 7, 7);
  Eigen::ComplexEigenSolver<MatrixXcd> es(a);
  REQUIRE(es.info() == Eigen::Success);
  const MatrixXcd v = es.eigenvectors();
  VectorXcd explam = es.eigenvalues().array().exp();
  MatrixXcd want = v * explam.asDiagonal() * v.inverse();
  CHECK(rel_err(linalg::expm(a), want) < 1e-9);
}

TEST_CASE("eigenvalues finds the spectrum of a rotation generator") {
  MatrixXcd a = MatrixXcd::Zero(2, 2);
  a(0, 1) = -1.0;
  a(1, 0) = 1.0;
  VectorXcd lam = linalg::eigenvalues(a);
  const double top = std::max(lam[0].imag(), lam[1].imag());
  const double bot = std::min(lam[0].imag(), lam[1].imag());
  CHECK(std::abs(top - 1.0) < 1e-14);
  CHECK(std::abs(bot + 1.0) < 1e-14);
  CHECK(std::abs(lam[0].real()) < 1e-14);
}

TEST_CASE("operator_norm2 on known matrices") {
  MatrixXcd d = MatrixXcd::Zero(3, 3);
  d(0, 0) = 2.0;
  d(1, 1) = complex<double>(0.0, -5.0);
  d(2, 2) = 1.0;
  CHECK(linalg::operator_norm2(d) == doctest::Approx(5.0).epsilon(1e-13));

  rng::Stream st(43);
  MatrixXcd u = Eigen::HouseholderQR<MatrixXcd>(testing::random_complex_matrix(st, 4, 4))
                    .householderQ();
  CHECK(linalg::operator_norm2(u) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sqrt_psd squares back to the input") {
  rng::Stream st(47);
  MatrixXcd r = testing::random_complex_matrix(st, 5, 5);
  MatrixXcd g = r * r.adjoint();
  MatrixXcd s = linalg::sqrt_psd(g);
  CHECK(rel_err(s * s, g) < 1e-10);
  CHECK(linalg::is_hermitian(s, 1e-10));
  CHECK_THROWS_AS(linalg::sqrt_psd(MatrixXcd(-g)), NotHermitian);
}

TEST_CASE("lyapunov_adjoint reproduces the hand-computed 2x2 solution") {
  // A = [[-1, 1], [0, -2]], C = I: the orbit integral evaluates to
  // X = [[1/2, 1/6], [1/6, 1/3]].
  MatrixXcd a(2, 2);
  a << -1.0, 1.0, 0.0, -2.0;
  MatrixXcd x = linalg::lyapunov_adjoint(a, MatrixXcd::Identity(2, 2));
  CHECK(std::abs(x(0, 0) - 0.5) < 1e-12);
  CHECK(std::abs(x(0, 1) - 1.0 / 6.0) < 1e-12);
  CHECK(std::abs(x(1, 0) - 1.0 / 6.0) < 1e-12);
  CHECK(std::abs(x(1, 1) - 1.0 / 3.0) < 1e-12);
}

TEST_CASE("lyapunov solvers satisfy their equations on random Hurwitz systems") {
  rng::Stream st(53);
  for (int trial = 0; trial < 5; ++trial) {
    const int m = 2 + int(st.uniform_int(0, 6));
    MatrixXcd a = testing::random_hurwitz_matrix(st, m, 0.3);
    MatrixXcd r = testing::random_complex_matrix(st, m, m);
    MatrixXcd c = r * r.adjoint() + MatrixXcd::Identity(m, m);

    MatrixXcd x = linalg::lyapunov_adjoint(a, c);
    CHECK((a.adjoint() * x + x * a + c).norm() / c.norm() < 1e-9);
    CHECK(linalg::is_hermitian(x, 1e-10 * x.cwiseAbs().maxCoeff()));
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(x);
    CHECK(es.eigenvalues().minCoeff() > 0.0);  // observability with C > 0

    MatrixXcd q = linalg::lyapunov(a, c);
    CHECK((a * q + q * a.adjoint() + c).norm() / c.norm() < 1e-9);
  }
}

TEST_CASE("lyapunov rejects a non-Hermitian right-hand side") {
  MatrixXcd a(2, 2);
  a << -1.0, 0.5, 0.0, -2.0;
  MatrixXcd c(2, 2);
  c << 1.0, 1.0, 0.0, 1.0;
  CHECK_THROWS_AS(linalg::lyapunov_adjoint(a, c), NotHermitian);
}

TEST_CASE("lyapunov detects the singular pairing") {
  // Eigenvalues +1 and -1: conj(1) + (-1) = 0, the column solve must refuse.
  MatrixXcd a = MatrixXcd::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = -1.0;
  CHECK_THROWS_AS(linalg::lyapunov_adjoint(a, MatrixXcd::Identity(2, 2)), EigenSolverFailure);
}

TEST_CASE("finite-horizon gramian: scalar closed form and Lyapunov limit") {
  MatrixXcd a = MatrixXcd::Constant(1, 1, -1.0);
  MatrixXcd b = MatrixXcd::Constant(1, 1, 1.0);
  const double t = 1.0;
  const double want = 0.5 * (1.0 - std::exp(-2.0 * t));
  CHECK(std::abs(linalg::finite_horizon_gramian(a, b, t)(0, 0).real() - want) < 1e-13);

  rng::Stream st(59);
  MatrixXcd ah = testing::random_hurwitz_matrix(st, 4, 0.5);
  MatrixXcd bh = testing::random_complex_matrix(st, 4, 2);
  MatrixXcd ginf = linalg::lyapunov(ah, MatrixXcd(bh * bh.adjoint()));
  MatrixXcd gt = linalg::finite_horizon_gramian(ah, bh, 40.0);
  CHECK(rel_err(gt, ginf) < 1e-10);

  // Short-horizon expansion: G(T) = T BB* + (T^2/2)(A BB* + BB* A*) + O(T^3).
  const double ts = 1e-3;
  MatrixXcd bb = bh * bh.adjoint();
  MatrixXcd want2 = ts * bb + 0.5 * ts * ts * (ah * bb + bb * ah.adjoint());
  CHECK(rel_err(linalg::finite_horizon_gramian(ah, bh, ts), want2) < 1e-6);

  // Monotone in T in the PSD order (trace suffices as a spot check).
  CHECK(linalg::finite_horizon_gramian(ah, bh, 2.0).real().trace() >
        linalg::finite_horizon_gramian(ah, bh, 1.0).real().trace());
}
