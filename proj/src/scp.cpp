#include "gstab/scp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gstab/errors.hpp"
#include "gstab/linalg.hpp"
#include "gstab/rng.hpp"

namespace gstab::scp {

using std::complex;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

constexpr double kStableTol = 1e-10;

void require_stable(const semigroup::Generator& gen, const char* what) {
  if (!(gen.spectral_abscissa < 0.0)) {
    throw NotStable(std::string(what) + " requires a stable generator; spectral abscissa is " +
                    std::to_string(gen.spectral_abscissa));
  }
}

// Members sqrt(w_j) T(t_j) b_k of the discretized operator orbit, for the
// Monte Carlo gamma-norm on lp spaces.
MatrixXcd scaled_operator_orbit(const semigroup::Generator& gen, const MatrixXcd& b, double t_max,
                                int points) {
  const int m = gen.dim();
  const int d = int(b.cols());
  MatrixXcd family(m, 0);
  for (int k = 0; k < d; ++k) {
    const auto orbit = semigroup::discretize_orbit(gen, b.col(k), t_max, points);
    MatrixXcd scaled = orbit.values;
    for (int j = 0; j < scaled.cols(); ++j) scaled.col(j) *= std::sqrt(orbit.weights[j]);
    family.conservativeResize(m, family.cols() + scaled.cols());
    family.rightCols(scaled.cols()) = scaled;
  }
  return family;
}

double tail_horizon(const semigroup::Generator& gen) {
  const double rate = -gen.spectral_abscissa;
  return std::log(1e8) / rate + 4.0 / rate;
}

// Orthonormal basis of the reachable subspace span{B, AB, ..., A^{m-1}B}.
MatrixXcd reachable_basis(const MatrixXcd& a, const MatrixXcd& b) {
  const int m = int(a.rows());
  MatrixXcd krylov(m, m * b.cols());
  MatrixXcd block = b;
  for (int k = 0; k < m; ++k) {
    krylov.middleCols(k * b.cols(), b.cols()) = block;
    block = a * block;
  }
  Eigen::ColPivHouseholderQR<MatrixXcd> qr(krylov);
  qr.setThreshold(1e-10);
  const auto rank = qr.rank();
  if (rank == 0) return MatrixXcd(m, 0);
  return qr.householderQ() * MatrixXcd::Identity(m, rank);
}

}  // namespace

ScpProblem::ScpProblem(semigroup::Generator gen_in, MatrixXcd b_in)
    : gen(std::move(gen_in)), b(std::move(b_in)) {
  if (b.rows() != gen.dim()) {
    throw DimensionMismatch("noise map B has " + std::to_string(b.rows()) +
                            " rows, the state space has dim " + std::to_string(gen.dim()));
  }
  if (b.cols() < 1) throw ValidationError("noise map B needs at least one column");
}

SolutionNorm solution_norm(const ScpProblem& prob, double t_max,
                           const std::optional<gaussian::McConfig>& mc) {
  if (!(t_max > 0.0)) throw ValidationError("solution horizon must be positive");
  SolutionNorm out;
  out.horizon = t_max;
  if (prob.gen.space.is_l2() && !mc) {
    const MatrixXcd g = linalg::finite_horizon_gramian(prob.gen.a, prob.b, t_max);
    out.value = std::sqrt(std::max(0.0, std::real(g.trace())));
    out.exact = true;
    return out;
  }
  const MatrixXcd family = scaled_operator_orbit(prob.gen, prob.b, t_max, 1025);
  const auto est = gaussian::gaussian_sum_norm(family, prob.gen.space, mc);
  out.value = est.value;
  out.std_error = est.std_error;
  out.exact = est.exact;
  return out;
}

SolutionExistence solution_exists(const ScpProblem& prob, double t_max,
                                  const std::optional<gaussian::McConfig>& mc) {
  SolutionExistence out;
  out.norm = solution_norm(prob, t_max, mc);
  out.exists = std::isfinite(out.norm.value);
  return out;
}

MatrixXcd invariant_covariance(const ScpProblem& prob) {
  require_stable(prob.gen, "invariant covariance");
  return linalg::lyapunov(prob.gen.a, (prob.b * prob.b.adjoint()).eval());
}

InvariantMeasureReport invariant_measure_exists(const ScpProblem& prob,
                                                const std::optional<gaussian::McConfig>& mc) {
  InvariantMeasureReport report;
  const int m = prob.state_dim();
  const MatrixXcd v = reachable_basis(prob.gen.a, prob.b);
  report.reachable_dim = int(v.cols());

  if (report.reachable_dim == 0) {
    // Undriven problem: X = 0 is a stationary solution regardless of A.
    report.exists = true;
    report.unique = prob.gen.spectral_abscissa < -kStableTol;
    report.covariance = MatrixXcd::Zero(m, m);
    report.reachable_abscissa = -std::numeric_limits<double>::infinity();
    report.gamma_norm = 0.0;
    report.exact = true;
    return report;
  }

  const MatrixXcd a_r = v.adjoint() * prob.gen.a * v;
  report.reachable_abscissa = linalg::eigenvalues(a_r).real().maxCoeff();
  report.exists = report.reachable_abscissa < -kStableTol;
  report.unique = report.exists && prob.gen.spectral_abscissa < -kStableTol;
  if (!report.exists) {
    report.gamma_norm = std::numeric_limits<double>::infinity();
    report.exact = true;
    return report;
  }

  const MatrixXcd b_r = v.adjoint() * prob.b;
  const MatrixXcd q_r = linalg::lyapunov(a_r, (b_r * b_r.adjoint()).eval());
  report.covariance = v * q_r * v.adjoint();

  if (prob.gen.space.is_l2() && !mc) {
    report.gamma_norm = std::sqrt(std::max(0.0, std::real(q_r.trace())));
    report.exact = true;
    return report;
  }
  // The driven dynamics live on the reachable subspace, so the discretized
  // orbit of the restricted system carries the full gamma-norm.
  semigroup::Generator gen_r(a_r, SpaceSpec::l2(report.reachable_dim));
  const double horizon = tail_horizon(gen_r);
  MatrixXcd family = scaled_operator_orbit(gen_r, b_r, horizon, 1025);
  family = v * family;  // back to ambient coordinates for the lp norm
  const auto est = gaussian::gaussian_sum_norm(family, prob.gen.space, mc);
  report.gamma_norm = est.value;
  report.std_error = est.std_error;
  report.exact = est.exact;
  return report;
}

FrequencyNorm resolvent_transform_norm(const ScpProblem& prob, double rel_tol) {
  require_stable(prob.gen, "the frequency-domain solution norm");
  if (!(rel_tol > 0.0 && rel_tol < 0.5)) {
    throw ValidationError("frequency quadrature tolerance must lie in (0, 0.5)");
  }

  const double norm_a = linalg::operator_norm2(prob.gen.a);
  const double b_hs2 = prob.b.squaredNorm();
  const auto g = [&](double s) {
    return (semigroup::resolvent(prob.gen, complex<double>(0.0, s)) * prob.b).squaredNorm();
  };

  const auto simpson = [](const auto& fn, double lo, double hi, int points) {
    const double h = (hi - lo) / (points - 1);
    double acc = 0.0;
    for (int j = 0; j < points; ++j) {
      const bool edge = (j == 0 || j == points - 1);
      acc += (edge ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0)) * fn(lo + h * j);
    }
    return acc * h / 3.0;
  };
  const auto adaptive = [&](const auto& fn, double lo, double hi, int& points_used) {
    int points = 257;
    double val = simpson(fn, lo, hi, points);
    for (;;) {
      if (points > (1 << 21)) {
        throw GridTooCoarse("frequency quadrature did not settle within " +
                            std::to_string(points) + " points");
      }
      const int finer_points = 2 * (points - 1) + 1;
      const double finer = simpson(fn, lo, hi, finer_points);
      const bool settled =
          std::abs(finer - val) <= 0.25 * rel_tol * std::max(std::abs(finer), 1e-300);
      val = finer;
      points = finer_points;
      if (settled) break;
    }
    points_used = points;
    return val;
  };

  // Core on [-r0, r0]; the tails map through s -> 1/u onto finite intervals,
  // where the integrand u -> g(1/u)/u^2 extends smoothly to u = 0 with value
  // ||B||_HS^2, so no truncation error is left behind.
  const double r0 = 2.0 * norm_a + 10.0;
  const auto tail_integrand = [&](double sign) {
    return [&, sign](double u) { return u == 0.0 ? b_hs2 : g(sign / u) / (u * u); };
  };
  int core_points = 0, tail_pos_points = 0, tail_neg_points = 0;
  const double core = adaptive(g, -r0, r0, core_points);
  const double tail_pos = adaptive(tail_integrand(1.0), 0.0, 1.0 / r0, tail_pos_points);
  const double tail_neg = adaptive(tail_integrand(-1.0), 0.0, 1.0 / r0, tail_neg_points);

  FrequencyNorm out;
  out.grid_points = core_points + tail_pos_points + tail_neg_points;
  out.tail_bound = std::sqrt(std::max(0.0, tail_pos + tail_neg));
  out.value = std::sqrt(std::max(0.0, core + tail_pos + tail_neg));
  // Plancherel: int ||R(is)B||_HS^2 ds = 2 pi int ||T(t)B||_HS^2 dt
  //           = 2 pi trace(Q).
  const MatrixXcd q = invariant_covariance(prob);
  out.time_domain_value = std::sqrt(2.0 * M_PI * std::max(0.0, std::real(q.trace())));
  out.rel_gap = std::abs(out.value - out.time_domain_value) /
                std::max(out.time_domain_value, 1e-300);
  return out;
}

PerturbationMargin perturbation_margin(const semigroup::Generator& gen) {
  require_stable(gen, "the perturbation margin");
  PerturbationMargin out;
  out.axis_sup = semigroup::sup_resolvent_norm_on_line(gen, 0.0, 1e-4, &out.grid_points);
  out.margin = 1.0 / out.axis_sup;
  return out;
}

PerturbationReport perturbed_invariant_measure_check(const ScpProblem& prob, const MatrixXcd& p,
                                                     const std::optional<gaussian::McConfig>& mc) {
  const int m = prob.state_dim();
  if (p.rows() != m || p.cols() != m) {
    throw DimensionMismatch("perturbation is " + std::to_string(p.rows()) + "x" +
                            std::to_string(p.cols()) + " on a dim-" + std::to_string(m) +
                            " state space");
  }
  require_stable(prob.gen, "the perturbed invariant measure check");

  PerturbationReport report;
  report.perturbation_norm = linalg::operator_norm2(p);
  report.base_axis_sup = semigroup::sup_resolvent_norm_on_line(prob.gen, 0.0, 1e-4);
  report.delta_margin = 1.0 / report.base_axis_sup;
  report.contraction_c = report.perturbation_norm * report.base_axis_sup;
  if (report.contraction_c >= 1.0) {
    throw MarginExceeded("perturbation norm " + std::to_string(report.perturbation_norm) +
                         " reaches the stability radius " + std::to_string(report.delta_margin));
  }
  report.norm_inflation = 1.0 / (1.0 - report.contraction_c);

  // The contraction certifies stability of A + P outright; the measured
  // axis sup must sit under the Neumann inflation.
  semigroup::Generator perturbed(prob.gen.a + p, prob.gen.space);
  ScpProblem pprob(perturbed, prob.b);
  report.perturbed_axis_sup = semigroup::sup_resolvent_norm_on_line(perturbed, 0.0, 1e-4);
  report.axis_within =
      report.perturbed_axis_sup <= report.base_axis_sup * report.norm_inflation * (1.0 + 1e-3);

  // Frequency gamma-norms via Plancherel (exact on l2): the perturbed one is
  // bounded by 1/(1 - C) times the base one.
  const MatrixXcd q0 = invariant_covariance(prob);
  const MatrixXcd q1 = invariant_covariance(pprob);
  report.base_transform_norm = std::sqrt(2.0 * M_PI * std::max(0.0, std::real(q0.trace())));
  report.perturbed_transform_norm = std::sqrt(2.0 * M_PI * std::max(0.0, std::real(q1.trace())));
  // The slack absorbs the 1e-4 relative tolerance of the axis sup feeding C.
  report.transform_within = report.perturbed_transform_norm <=
                            report.base_transform_norm * report.norm_inflation * (1.0 + 1e-3);
  report.covariance_shift =
      linalg::operator_norm2((q1 - q0).eval()) / std::max(linalg::operator_norm2(q0), 1e-300);
  report.perturbed_report = invariant_measure_exists(pprob, mc);
  return report;
}

SolutionPerturbationReport bounded_perturbation_solution(
    const ScpProblem& prob, const MatrixXcd& p, double t_max,
    const std::optional<gaussian::McConfig>& mc) {
  const int m = prob.state_dim();
  if (p.rows() != m || p.cols() != m) {
    throw DimensionMismatch("perturbation is " + std::to_string(p.rows()) + "x" +
                            std::to_string(p.cols()) + " on a dim-" + std::to_string(m) +
                            " state space");
  }
  if (!(t_max > 0.0)) throw ValidationError("solution horizon must be positive");

  SolutionPerturbationReport out;
  out.horizon = t_max;
  out.perturbation_norm = linalg::operator_norm2(p);

  // Grow the right shift until the shifted resolvent contracts against P on
  // the closed right half-plane. The half-plane sup lives on the axis, which
  // the line-sup routine evaluates for A - omega1 I. Targeting 0.75 rather
  // than 1 keeps the Neumann tail short.
  const double s = prob.gen.spectral_abscissa;
  const MatrixXcd eye = MatrixXcd::Identity(m, m);
  const double cap = s + 1.0 + 1048576.0 * std::max(1.0, out.perturbation_norm);
  double step = std::max(1.0, 2.0 * out.perturbation_norm);
  for (;;) {
    out.omega1 = s + 1.0 + step;
    semigroup::Generator shifted(prob.gen.a - out.omega1 * eye, prob.gen.space);
    out.halfplane_rbound = semigroup::sup_resolvent_norm_on_line(shifted, 0.0, 1e-4);
    out.contraction = out.halfplane_rbound * out.perturbation_norm;
    if (out.contraction <= 0.75) break;
    if (out.omega1 > cap) {
      throw ShiftSearchFailed("no right shift below " + std::to_string(cap) +
                              " contracts the Neumann factor against ||P|| = " +
                              std::to_string(out.perturbation_norm));
    }
    step *= 2.0;
  }

  // Truncate sum_n (R(is) P)^n R(is) deep enough for a 1e-12 geometric tail,
  // then compare with the directly inverted perturbed resolvent across a
  // frequency grid with geometric outliers.
  semigroup::Generator shifted(prob.gen.a - out.omega1 * eye, prob.gen.space);
  semigroup::Generator shifted_perturbed(shifted.a + p, prob.gen.space);
  int terms = 1;
  if (out.contraction > 1e-300) {
    terms = int(std::ceil(std::log(1e-12 * (1.0 - out.contraction)) /
                          std::log(out.contraction)));
    terms = std::clamp(terms, 1, 400);
  }
  out.neumann_terms = terms;

  std::vector<double> freqs{0.0};
  const double reach = linalg::operator_norm2(shifted.a) + out.perturbation_norm + 1.0;
  for (int k = 1; k <= 8; ++k) {
    freqs.push_back(reach * k / 8.0);
    freqs.push_back(-reach * k / 8.0);
  }
  for (double u = 2.0 * reach; u <= 32.0 * reach; u *= 2.0) {
    freqs.push_back(u);
    freqs.push_back(-u);
  }
  for (double f : freqs) {
    const complex<double> lam(0.0, f);
    const MatrixXcd r = semigroup::resolvent(shifted, lam);
    const MatrixXcd rp = r * p;
    MatrixXcd term = r;
    MatrixXcd sum = r;
    for (int n = 1; n <= terms; ++n) {
      term = rp * term;
      sum += term;
    }
    const MatrixXcd direct = semigroup::resolvent(shifted_perturbed, lam);
    const double rel = linalg::operator_norm2((sum - direct).eval()) /
                       std::max(linalg::operator_norm2(direct), 1e-300);
    out.neumann_max_rel_error = std::max(out.neumann_max_rel_error, rel);
  }

  out.base = solution_norm(prob, t_max, mc);
  semigroup::Generator perturbed(prob.gen.a + p, prob.gen.space);
  out.perturbed = solution_norm(ScpProblem(perturbed, prob.b), t_max, mc);
  if (out.base.value > 0.0) {
    out.ratio = out.perturbed.value / out.base.value;
  } else {
    out.ratio = out.perturbed.value > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  }
  return out;
}

double lyapunov_decay_rate(const semigroup::Generator& gen, double rel_tol) {
  const int m = gen.dim();
  // Stability of A + omega I, decided by solvability and positivity of the
  // orbit-energy Gramian alone.
  const auto stable = [&](double omega) {
    const MatrixXcd shifted = gen.a + omega * MatrixXcd::Identity(m, m);
    MatrixXcd x;
    try {
      x = linalg::lyapunov_adjoint(shifted, MatrixXcd::Identity(m, m));
    } catch (const AnalysisError&) {
      return false;  // singular eigenvalue pairing: the boundary itself
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(x);
    return es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0.0;
  };

  if (!stable(0.0)) {
    throw ShiftSearchFailed("the unshifted generator already fails the Lyapunov stability oracle");
  }
  double lo = 0.0;
  double hi = linalg::operator_norm2(gen.a) + 1.0;
  if (stable(hi)) {
    throw ShiftSearchFailed("no unstable shift below ||A|| + 1; bisection bracket is invalid");
  }
  while (hi - lo > rel_tol * hi + 1e-14) {
    const double mid = 0.5 * (lo + hi);
    (stable(mid) ? lo : hi) = mid;
  }
  return lo;
}

DatkoPazyCertificate datko_pazy_certify(const semigroup::Generator& gen,
                                        const std::optional<gaussian::McConfig>& mc) {
  DatkoPazyCertificate cert;
  cert.certificate = semigroup::resolvent_rbound_datko(gen, semigroup::CertificateConfig{}, mc);
  cert.margin = perturbation_margin(gen).margin;

  // A right shift below both the certified epsilon0 and the stability radius
  // keeps every certificate ingredient finite.
  cert.epsilon = 0.5 * std::min(cert.certificate.epsilon0, cert.margin);
  const int m = gen.dim();
  const MatrixXcd eye = MatrixXcd::Identity(m, m);
  semigroup::Generator shifted(gen.a + cert.epsilon * eye, gen.space);
  cert.shifted_orbit_bound = semigroup::uniform_orbit_bound(shifted, mc).value;

  // Finiteness of the shifted basis orbits is a Hilbertian statement (the
  // lp norm is sandwiched by the l2 one), so the exact Lyapunov route decides
  // it on any space.
  semigroup::Generator shifted_l2(shifted.a, SpaceSpec::l2(m));
  cert.shifted_norms_finite = true;
  for (int j = 0; j < m; ++j) {
    const auto est = semigroup::orbit_gamma_norm(shifted_l2, VectorXcd::Unit(m, j), std::nullopt);
    if (!std::isfinite(est.value)) cert.shifted_norms_finite = false;
  }

  cert.decay_rate = lyapunov_decay_rate(gen);
  cert.decay_consistent =
      cert.certificate.epsilon0 <= cert.decay_rate * (1.0 + 1e-6) &&
      std::abs(cert.decay_rate + cert.certificate.s_numeric) <=
          1e-6 * std::max(1.0, -cert.certificate.s_numeric);

  // Rank-one noise sweep for the shifted problem: with B = x h*, ||h|| = 1,
  // the stationary trace is the squared shifted orbit gamma-norm of x, so the
  // sweep's sup over unit x is the shifted l2 uniform orbit bound; every
  // swept SCP(A + epsilon, x h*) must admit a unique invariant measure.
  const MatrixXcd gram = linalg::lyapunov_adjoint(shifted_l2.a, eye);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gram);
  if (es.info() != Eigen::Success) throw EigenSolverFailure("orbit Gramian eigensolve failed");
  const double m_shift_l2 = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));

  rng::Stream st(rng::derive_seed(mc ? mc->seed : 0, "rank-one-sweep"));
  std::vector<VectorXcd> xs;
  for (int j = 0; j < m; ++j) xs.push_back(VectorXcd::Unit(m, j));
  xs.push_back(es.eigenvectors().col(m - 1));
  for (int k = 0; k < 4; ++k) {
    VectorXcd v(m);
    for (int j = 0; j < m; ++j) v[j] = complex<double>(st.normal(), st.normal());
    xs.push_back(v.normalized());
  }
  double swept = 0.0;
  cert.rank_one_measures_exist = true;
  for (const auto& x : xs) {
    const VectorXcd unit = x.normalized();
    ScpProblem rank_one(shifted_l2, MatrixXcd(unit));  // B = x h* with scalar unit h
    const auto measure = invariant_measure_exists(rank_one, std::nullopt);
    if (!(measure.exists && measure.unique)) cert.rank_one_measures_exist = false;
    swept = std::max(swept, measure.gamma_norm);
  }
  cert.rank_one_max = swept;
  cert.rank_one_trials = int(xs.size());
  cert.rank_one_within = swept <= m_shift_l2 * (1.0 + 1e-9);
  return cert;
}

}  // namespace gstab::scp
