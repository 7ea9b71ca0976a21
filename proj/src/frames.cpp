#include "gstab/frames.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "gstab/linalg.hpp"

namespace gstab::frames {

using Eigen::MatrixXcd;
using std::complex;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_decay(double a) {
  if (!(a > 0.0)) {
    throw NonPositiveDecay("exponential family requires decay a > 0, got " + std::to_string(a));
  }
}

}  // namespace

ExponentialFamily::ExponentialFamily(double a, double rho, int n_min, int n_max)
    : a(a), rho(rho), n_min(n_min), n_max(n_max) {
  check_decay(a);
  if (n_min > n_max) {
    throw ValidationError("empty index range [" + std::to_string(n_min) + ", " +
                          std::to_string(n_max) + "]");
  }
}

std::vector<int> ExponentialFamily::all_indices() const {
  std::vector<int> idx(static_cast<std::size_t>(size()), 0);
  for (int i = 0; i < size(); ++i) idx[std::size_t(i)] = n_min + i;
  return idx;
}

const char* to_string(FrameMethod m) noexcept {
  switch (m) {
    case FrameMethod::gram: return "gram";
    case FrameMethod::cck: return "cck";
    case FrameMethod::closed_form: return "closed_form";
  }
  return "unknown";
}

MatrixXcd gram_matrix(const ExponentialFamily& fam, const std::vector<int>& indices) {
  if (indices.empty()) throw EmptyIndexSet("gram_matrix needs at least one index");
  for (int n : indices) {
    if (n < fam.n_min || n > fam.n_max) {
      throw ValidationError("index " + std::to_string(n) + " outside family range [" +
                            std::to_string(fam.n_min) + ", " + std::to_string(fam.n_max) + "]");
    }
  }
  const auto n = Eigen::Index(indices.size());
  MatrixXcd g(n, n);
  for (Eigen::Index u = 0; u < n; ++u) {
    for (Eigen::Index v = 0; v < n; ++v) {
      const double diff = double(indices[std::size_t(v)] - indices[std::size_t(u)]);
      g(u, v) = 1.0 / complex<double>(2.0 * fam.a, -kTwoPi * diff);
    }
  }
  return g;
}

MatrixXcd gram_matrix(const SampledFamily& fam) {
  if (fam.values.cols() == 0) throw EmptyIndexSet("sampled family has no members");
  if (fam.nodes.size() != fam.values.rows() || fam.nodes.size() != fam.weights.size()) {
    throw DimensionMismatch("sampled family nodes, weights and values disagree");
  }
  if (fam.nodes.size() >= 2) {
    const double h = (fam.nodes[fam.nodes.size() - 1] - fam.nodes[0]) / double(fam.nodes.size() - 1);
    if (fam.max_frequency > 0.0 && h * fam.max_frequency > 0.5) {
      throw GridTooCoarse("node spacing " + std::to_string(h) +
                          " undersamples max frequency " + std::to_string(fam.max_frequency));
    }
  }
  MatrixXcd g = fam.values.adjoint() * fam.weights.asDiagonal() * fam.values;
  return 0.5 * (g + g.adjoint()).eval();
}

FrameConstants frame_constants_gram(const MatrixXcd& gram) {
  if (gram.rows() == 0) throw EmptyIndexSet("empty Gram matrix");
  if (!linalg::is_hermitian(gram, 1e-10 * std::max(1.0, gram.cwiseAbs().maxCoeff()))) {
    throw NotHermitian("Gram matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EigenSolverFailure("Gram eigensolver failed");
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return {std::sqrt(std::max(hi, 0.0)), std::sqrt(std::max(lo, 0.0)), FrameMethod::gram};
}

double f_function(const ExponentialFamily& fam, double t, int K) {
  if (!(t >= 0.0 && t < 1.0)) {
    throw ValidationError("f_function argument must lie in [0, 1), got " + std::to_string(t));
  }
  if (K < 0) throw ValidationError("truncation order must be >= 0");
  double sum = 0.0;
  for (int k = 0; k <= K; ++k) {
    const double u = std::exp(-fam.a * (t + k));
    sum += u * u;  // |f(t+k)|^2; the oscillatory phase has unit modulus
  }
  return sum;
}

int f_truncation_for(double a, double tail_tol) {
  check_decay(a);
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) {
    throw ValidationError("tail tolerance must lie in (0, 1)");
  }
  // Relative truncation error of the K-term sum is e^{-2a(K+1)}.
  const double k = std::ceil(std::log(1.0 / tail_tol) / (2.0 * a)) - 1.0;
  constexpr double kMaxTerms = 1e7;
  if (!(k < kMaxTerms)) {
    throw ToleranceNotAchievable("decay " + std::to_string(a) + " needs " + std::to_string(k) +
                                 " terms for tail " + std::to_string(tail_tol));
  }
  return std::max(0, int(k));
}

FrameConstants frame_constants_cck(const ExponentialFamily& fam, int grid_size, double rel_tol,
                                   double tail_tol) {
  if (grid_size < 2) throw GridTooCoarse("F-function grid needs at least 2 points");
  const int kk = f_truncation_for(fam.a, tail_tol);

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int i = 0; i < grid_size; ++i) {
    const double f = f_function(fam, double(i) / grid_size, kk);
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  // F is 2a-log-Lipschitz (|F'| = 2aF <= 2a F(0)), so a grid of spacing 1/g
  // encloses ess inf within lip/g from below and ess sup within lip/g from
  // above. The truncation itself only lowers F by a factor e^{-2a(K+1)}.
  const double lip = 2.0 * fam.a * hi;
  const double slack = lip / grid_size + hi * std::exp(-2.0 * fam.a * (kk + 1));
  if (!(slack <= rel_tol * lo)) {
    throw GridTooCoarse("grid of " + std::to_string(grid_size) +
                        " points cannot certify the F-function range to relative " +
                        std::to_string(rel_tol));
  }
  return {std::sqrt(hi), std::sqrt(lo), FrameMethod::cck};
}

FrameConstants exponential_family_constants(double a) {
  check_decay(a);
  // c_hilbert^2 = e^{2a}/(e^{2a}-1) and c_bessel^2 = 1/(e^{2a}-1), written
  // against expm1 so large decays neither overflow nor lose digits.
  const double denom = -std::expm1(-2.0 * a);  // 1 - e^{-2a}
  const double ch2 = 1.0 / denom;
  const double cb2 = std::exp(-2.0 * a) / denom;
  return {std::sqrt(ch2), std::sqrt(cb2), FrameMethod::closed_form};
}

SampledFamily sample_family(const ExponentialFamily& fam, double t_max, int points) {
  if (!(t_max > 0.0)) throw ValidationError("sampling horizon must be positive");
  if (points < 3) throw GridTooCoarse("sampling needs at least 3 points");
  if (points % 2 == 0) ++points;  // composite Simpson wants an odd count

  SampledFamily out;
  out.max_frequency =
      std::max(std::abs(fam.n_min + fam.rho), std::abs(fam.n_max + fam.rho));
  const double h = t_max / double(points - 1);
  if (out.max_frequency > 0.0 && h * out.max_frequency > 0.5) {
    throw GridTooCoarse("grid spacing " + std::to_string(h) + " undersamples frequency " +
                        std::to_string(out.max_frequency));
  }

  out.nodes.resize(points);
  out.weights.resize(points);
  out.values.resize(points, fam.size());
  for (int i = 0; i < points; ++i) {
    const double t = h * i;
    out.nodes[i] = t;
    out.weights[i] = (i == 0 || i == points - 1) ? h / 3.0 : (i % 2 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
    for (int c = 0; c < fam.size(); ++c) {
      const double freq = kTwoPi * (fam.n_min + c + fam.rho);
      out.values(i, c) = std::exp(-fam.a * t) * std::polar(1.0, freq * t);
    }
  }
  return out;
}

BesselAdjudication adjudicate_bessel_constant(double a, int gram_size) {
  check_decay(a);
  if (gram_size < 2) throw ValidationError("adjudication needs a Gram of size >= 2");

  BesselAdjudication adj;
  adj.gram_size = gram_size;
  const double denom = -std::expm1(-2.0 * a);
  adj.candidate_essinf = std::exp(-2.0 * a) / denom;          // 1/(e^{2a}-1)
  adj.candidate_direct = std::exp(-2.0 * a) * adj.candidate_essinf;

  const ExponentialFamily fam(a, 0.0, 0, gram_size - 1);
  const auto fc = frame_constants_gram(gram_matrix(fam, fam.all_indices()));
  adj.gram_lambda_min = fc.c_bessel * fc.c_bessel;

  // The truncated-Gram minimal eigenvalue decreases to the true bound, so the
  // candidate it lands nearest is the law of the family.
  const double err_direct = std::abs(adj.gram_lambda_min - adj.candidate_direct);
  const double err_essinf = std::abs(adj.gram_lambda_min - adj.candidate_essinf);
  adj.selected_cb2 = err_essinf <= err_direct ? adj.candidate_essinf : adj.candidate_direct;
  adj.discrepancy_factor = adj.candidate_direct / adj.candidate_essinf;
  return adj;
}

}  // namespace gstab::frames
