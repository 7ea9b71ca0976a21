#include "gstab/linalg.hpp"

#include <cmath>
#include <string>

#include "gstab/errors.hpp"

namespace gstab::linalg {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

// Backward-error thresholds for the 1-norm (Higham 2005).
constexpr double kTheta3 = 1.495585217958292e-002;
constexpr double kTheta5 = 2.539398330063230e-001;
constexpr double kTheta7 = 9.504178996162932e-001;
constexpr double kTheta9 = 2.097847961257068e+000;
constexpr double kTheta13 = 5.371920351148152e+000;

MatrixXcd pade_solve(const MatrixXcd& u, const MatrixXcd& v) {
  return (-u + v).partialPivLu().solve(u + v);
}

MatrixXcd pade3(const MatrixXcd& a, const MatrixXcd& id) {
  constexpr double b[] = {120., 60., 12., 1.};
  const MatrixXcd a2 = a * a;
  const MatrixXcd u = a * (b[3] * a2 + b[1] * id);
  const MatrixXcd v = b[2] * a2 + b[0] * id;
  return pade_solve(u, v);
}

MatrixXcd pade5(const MatrixXcd& a, const MatrixXcd& id) {
  constexpr double b[] = {30240., 15120., 3360., 420., 30., 1.};
  const MatrixXcd a2 = a * a;
  const MatrixXcd a4 = a2 * a2;
  const MatrixXcd u = a * (b[5] * a4 + b[3] * a2 + b[1] * id);
  const MatrixXcd v = b[4] * a4 + b[2] * a2 + b[0] * id;
  return pade_solve(u, v);
}

MatrixXcd pade7(const MatrixXcd& a, const MatrixXcd& id) {
  constexpr double b[] = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
  const MatrixXcd a2 = a * a;
  const MatrixXcd a4 = a2 * a2;
  const MatrixXcd a6 = a4 * a2;
  const MatrixXcd u = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const MatrixXcd v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  return pade_solve(u, v);
}

MatrixXcd pade9(const MatrixXcd& a, const MatrixXcd& id) {
  constexpr double b[] = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                          2162160.,     110880.,     3960.,       90.,        1.};
  const MatrixXcd a2 = a * a;
  const MatrixXcd a4 = a2 * a2;
  const MatrixXcd a6 = a4 * a2;
  const MatrixXcd a8 = a6 * a2;
  const MatrixXcd u = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const MatrixXcd v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  return pade_solve(u, v);
}

MatrixXcd pade13(const MatrixXcd& a, const MatrixXcd& id) {
  constexpr double b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                          1187353796428800.,  129060195264000.,   10559470521600.,
                          670442572800.,      33522128640.,       1323241920.,
                          40840800.,          960960.,            16380.,
                          182.,               1.};
  const MatrixXcd a2 = a * a;
  const MatrixXcd a4 = a2 * a2;
  const MatrixXcd a6 = a4 * a2;
  const MatrixXcd u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 +
           b[1] * id);
  const MatrixXcd v =
      a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  return pade_solve(u, v);
}

}  // namespace

MatrixXcd expm(const MatrixXcd& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("expm requires a square matrix");
  const auto id = MatrixXcd::Identity(a.rows(), a.cols());
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 <= kTheta3) return pade3(a, id);
  if (norm1 <= kTheta5) return pade5(a, id);
  if (norm1 <= kTheta7) return pade7(a, id);
  if (norm1 <= kTheta9) return pade9(a, id);
  int squarings = 0;
  MatrixXcd scaled = a;
  if (norm1 > kTheta13) {
    squarings = int(std::ceil(std::log2(norm1 / kTheta13)));
    scaled = a / std::pow(2.0, squarings);
  }
  MatrixXcd r = pade13(scaled, id);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

VectorXcd eigenvalues(const MatrixXcd& a) {
  Eigen::ComplexEigenSolver<MatrixXcd> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw EigenSolverFailure("complex eigensolver did not converge on a " +
                             std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                             " matrix");
  }
  return es.eigenvalues();
}

double operator_norm2(const MatrixXcd& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::JacobiSVD<MatrixXcd>(a).singularValues()(0);
}

bool is_hermitian(const MatrixXcd& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

MatrixXcd sqrt_psd(const MatrixXcd& g, double clamp) {
  if (!is_hermitian(g, 1e-10 * std::max(1.0, g.cwiseAbs().maxCoeff()))) {
    throw NotHermitian("sqrt_psd input is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(g);
  if (es.info() != Eigen::Success) throw EigenSolverFailure("self-adjoint eigensolver failed");
  Eigen::VectorXd lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] < -clamp) {
      throw NotHermitian("sqrt_psd input has negative eigenvalue " + std::to_string(lam[i]));
    }
    lam[i] = std::sqrt(std::max(lam[i], 0.0));
  }
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

MatrixXcd lyapunov_adjoint(const MatrixXcd& a, const MatrixXcd& c) {
  const auto n = a.rows();
  if (a.cols() != n || c.rows() != n || c.cols() != n) {
    throw DimensionMismatch("lyapunov operands must be square and conformable");
  }
  if (!is_hermitian(c, 1e-10 * std::max(1.0, c.cwiseAbs().maxCoeff()))) {
    throw NotHermitian("lyapunov right-hand side is not Hermitian");
  }
  Eigen::ComplexSchur<MatrixXcd> schur(a);
  if (schur.info() != Eigen::Success) throw EigenSolverFailure("complex Schur decomposition failed");
  const MatrixXcd& t = schur.matrixT();
  const MatrixXcd& q = schur.matrixU();
  const MatrixXcd ct = q.adjoint() * c * q;

  // T* Y + Y T = -C~, solved column by column: (T* + T_jj I) y_j depends only
  // on earlier columns, and T* + T_jj I is lower triangular.
  MatrixXcd y = MatrixXcd::Zero(n, n);
  const MatrixXcd tadj = t.adjoint();
  for (Eigen::Index j = 0; j < n; ++j) {
    VectorXcd rhs = -ct.col(j);
    if (j > 0) rhs.noalias() -= y.leftCols(j) * t.col(j).head(j);
    MatrixXcd lhs = tadj;
    lhs.diagonal().array() += t(j, j);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(lhs(i, i)) < 1e-14) {
        throw EigenSolverFailure(
            "Lyapunov equation is singular: eigenvalue pair with conj(mu) + lambda = 0");
      }
    }
    y.col(j) = lhs.triangularView<Eigen::Lower>().solve(rhs);
  }
  MatrixXcd x = q * y * q.adjoint();
  x = 0.5 * (x + x.adjoint()).eval();

  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff()) +
                       2.0 * a.cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff();
  const double residual = (a.adjoint() * x + x * a + c).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-8 * scale)) {
    throw EigenSolverFailure("Lyapunov residual " + std::to_string(residual) +
                             " exceeds tolerance");
  }
  return x;
}

MatrixXcd lyapunov(const MatrixXcd& a, const MatrixXcd& c) {
  return lyapunov_adjoint(a.adjoint(), c);
}

MatrixXcd finite_horizon_gramian(const MatrixXcd& a, const MatrixXcd& b, double t) {
  const auto n = a.rows();
  if (a.cols() != n || b.rows() != n) {
    throw DimensionMismatch("gramian requires square A and conformable B");
  }
  if (!(t >= 0.0)) throw ValidationError("gramian horizon must be >= 0");
  if (t == 0.0) return MatrixXcd::Zero(n, n);

  MatrixXcd block = MatrixXcd::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = a;
  block.topRightCorner(n, n) = b * b.adjoint();
  block.bottomRightCorner(n, n) = -a.adjoint();

  // The block exponential carries e^{+t||A||} modes, so long horizons are
  // reached by exact Gramian doubling G(2s) = G(s) + e^{sA} G(s) e^{sA*}
  // from a base step with a tame block norm.
  const double norm1 = block.cwiseAbs().colwise().sum().maxCoeff() * t;
  const int doublings = norm1 > 2.0 ? int(std::ceil(std::log2(norm1 / 2.0))) : 0;
  const double t0 = t / std::pow(2.0, doublings);

  // With F = expm([[A, BB*], [0, -A*]] t0): F11 = e^{t0 A} and
  // F12 F11* = int_0^{t0} e^{sA} BB* e^{sA*} ds.
  const MatrixXcd f = expm(block * t0);
  MatrixXcd step = f.topLeftCorner(n, n);
  MatrixXcd g = f.topRightCorner(n, n) * step.adjoint();
  for (int i = 0; i < doublings; ++i) {
    g = g + step * g * step.adjoint();
    step = step * step;
  }
  return 0.5 * (g + g.adjoint()).eval();
}

}  // namespace gstab::linalg
