#include "gstab/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gstab/errors.hpp"
#include "gstab/linalg.hpp"
#include "gstab/rng.hpp"

namespace gstab::semigroup {

using std::complex;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

double laplace_rbound_constant() {
  const double two_pi = 2.0 * M_PI;
  return two_pi / (-std::expm1(-two_pi));
}

Generator::Generator(MatrixXcd a_in, SpaceSpec space_in) : a(std::move(a_in)), space(space_in) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("generator matrix must be square, got " + std::to_string(a.rows()) +
                            "x" + std::to_string(a.cols()));
  }
  if (int(a.rows()) != space.dim) {
    throw DimensionMismatch("generator is " + std::to_string(a.rows()) + "-dimensional but the space has dim " +
                            std::to_string(space.dim));
  }
  spectrum = linalg::eigenvalues(a);
  spectral_abscissa = spectrum.real().maxCoeff();
}

MatrixXcd expm(const Generator& gen, double t) {
  if (!(t >= 0.0)) {
    throw ValidationError("semigroup time must be >= 0, got " + std::to_string(t));
  }
  return linalg::expm((t * gen.a).eval());
}

double spectral_abscissa(const Generator& gen) { return gen.spectral_abscissa; }

MatrixXcd resolvent(const Generator& gen, complex<double> lambda, double tol) {
  const double scale = std::max(1.0, gen.a.cwiseAbs().maxCoeff());
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < gen.spectrum.size(); ++i) {
    gap = std::min(gap, std::abs(lambda - gen.spectrum[i]));
  }
  if (gap <= tol * scale) {
    throw SpectrumHit("lambda = (" + std::to_string(lambda.real()) + ", " +
                      std::to_string(lambda.imag()) + ") lies within " + std::to_string(gap) +
                      " of the spectrum");
  }
  const int m = gen.dim();
  MatrixXcd shifted = lambda * MatrixXcd::Identity(m, m) - gen.a;
  return shifted.partialPivLu().solve(MatrixXcd::Identity(m, m));
}

DiscretizedOrbit discretize_orbit(const Generator& gen, const VectorXcd& x, double t_max,
                                  int points) {
  if (x.size() != gen.dim()) {
    throw DimensionMismatch("orbit start vector has dim " + std::to_string(x.size()) +
                            ", generator expects " + std::to_string(gen.dim()));
  }
  if (!(t_max > 0.0)) throw ValidationError("orbit horizon must be positive");
  if (points < 3) throw ValidationError("orbit grid needs at least 3 points");
  if (points % 2 == 0) points += 1;  // Simpson needs an odd node count

  DiscretizedOrbit orbit;
  orbit.nodes.resize(points);
  orbit.weights.resize(points);
  orbit.values.resize(x.size(), points);
  const double h = t_max / double(points - 1);
  orbit.step = h;
  for (int j = 0; j < points; ++j) {
    orbit.nodes[j] = h * j;
    const bool edge = (j == 0 || j == points - 1);
    orbit.weights[j] = (h / 3.0) * (edge ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0));
  }
  // One exact step exponential, then a node recurrence: orbit values at
  // successive nodes differ by the fixed factor e^{hA}.
  const MatrixXcd step = linalg::expm((h * gen.a).eval());
  VectorXcd v = x;
  orbit.values.col(0) = v;
  for (int j = 1; j < points; ++j) {
    v = step * v;
    orbit.values.col(j) = v;
  }
  return orbit;
}

VectorXcd laplace_transform(const DiscretizedOrbit& orbit, complex<double> lambda) {
  if (lambda.real() < 0.0) {
    throw ValidationError("Laplace transform of a discretized orbit requires Re(lambda) >= 0");
  }
  // Nyquist guard: the grid must resolve the oscillation e^{-i Im(lambda) t}.
  const double cycles_per_step = std::abs(lambda.imag()) * orbit.step / (2.0 * M_PI);
  if (cycles_per_step > 0.5) {
    throw GridTooCoarse("orbit grid step " + std::to_string(orbit.step) +
                        " undersamples Im(lambda) = " + std::to_string(lambda.imag()));
  }
  VectorXcd acc = VectorXcd::Zero(orbit.values.rows());
  for (int j = 0; j < orbit.nodes.size(); ++j) {
    acc += orbit.weights[j] * std::exp(-lambda * orbit.nodes[j]) * orbit.values.col(j);
  }
  return acc;
}

namespace {

void require_stable(const Generator& gen, const char* what) {
  if (!(gen.spectral_abscissa < 0.0)) {
    throw NotStable(std::string(what) + " requires a stable generator; spectral abscissa is " +
                    std::to_string(gen.spectral_abscissa));
  }
}

// Observability Gramian X = int_0^inf e^{tA*} e^{tA} dt, i.e. A*X + XA = -I.
MatrixXcd observability_gramian(const Generator& gen) {
  return linalg::lyapunov_adjoint(gen.a, MatrixXcd::Identity(gen.dim(), gen.dim()));
}

// Horizon where the orbit tail is negligible against its bulk: the slowest
// mode decays like e^{s t} with s the spectral abscissa, padded for
// non-normal transients.
double orbit_horizon(const Generator& gen) {
  const double rate = -gen.spectral_abscissa;
  return std::log(1e8) / rate + 4.0 / rate;
}

MatrixXcd scaled_orbit_family(const DiscretizedOrbit& orbit) {
  MatrixXcd family = orbit.values;
  for (int j = 0; j < family.cols(); ++j) family.col(j) *= std::sqrt(orbit.weights[j]);
  return family;
}

}  // namespace

gaussian::GaussianSumEstimate orbit_gamma_norm(const Generator& gen, const VectorXcd& x,
                                               const std::optional<gaussian::McConfig>& mc) {
  if (x.size() != gen.dim()) {
    throw DimensionMismatch("orbit start vector has dim " + std::to_string(x.size()) +
                            ", generator expects " + std::to_string(gen.dim()));
  }
  require_stable(gen, "orbit gamma-norm");
  if (gen.space.is_l2() && !mc) {
    // Exact: ||t -> e^{tA} x||_gamma^2 = x* X x with X the observability
    // Gramian.
    const MatrixXcd gram = observability_gramian(gen);
    const double sq = std::real(x.dot(gram * x));
    gaussian::GaussianSumEstimate est;
    est.value = std::sqrt(std::max(0.0, sq));
    est.std_error = 0.0;
    est.samples = 0;
    est.seed = 0;
    est.exact = true;
    return est;
  }
  // Quadrature members sqrt(w_j) e^{t_j A} x span the orbit restricted to the
  // grid's step functions; their Gaussian sum estimates the gamma-norm.
  const int points = 1025;
  const DiscretizedOrbit orbit = discretize_orbit(gen, x, orbit_horizon(gen), points);
  return gaussian::gaussian_sum_norm(scaled_orbit_family(orbit), gen.space, mc);
}

UniformOrbitBound uniform_orbit_bound(const Generator& gen,
                                      const std::optional<gaussian::McConfig>& mc,
                                      int directions) {
  require_stable(gen, "uniform orbit bound");
  const MatrixXcd gram = observability_gramian(gen);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gram);
  if (es.info() != Eigen::Success) throw EigenSolverFailure("observability Gramian eigensolve failed");
  const double m_l2 = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));

  UniformOrbitBound bound;
  if (gen.space.is_l2()) {
    bound.value = bound.lower = bound.upper = m_l2;
    bound.exact = true;
    return bound;
  }

  // lp: the l2 extremizer is sandwiched by the norm-equivalence factors, so
  // the certified value is the conversion upper bound; the lower bound comes
  // from directional search over basis vectors plus random directions.
  bound.exact = false;
  bound.upper = m_l2 * gen.space.l2_to_p() * gen.space.p_to_l2();
  bound.value = bound.upper;

  if (!mc) return bound;  // no sampling budget: keep the certified upper bound only

  const int m = gen.dim();
  std::vector<VectorXcd> tries;
  for (int j = 0; j < m; ++j) tries.push_back(VectorXcd::Unit(m, j));
  // The top Gramian eigenvector is the l2 extremizer; usually competitive.
  tries.push_back(es.eigenvectors().col(m - 1));
  rng::Stream st(rng::derive_seed(mc ? mc->seed : 0, "orbit-directions"));
  for (int k = 0; k < directions; ++k) {
    VectorXcd v(m);
    for (int j = 0; j < m; ++j) v[j] = complex<double>(st.normal(), st.normal());
    tries.push_back(std::move(v));
  }
  double best = 0.0;
  for (const auto& v : tries) {
    const double denom = gen.space.norm(v);
    if (denom < 1e-14) continue;
    best = std::max(best, orbit_gamma_norm(gen, v, mc).value / denom);
  }
  bound.lower = best;
  return bound;
}

RBoundEstimate rbound_estimate(const std::vector<MatrixXcd>& ops, const SpaceSpec& space,
                               const std::optional<gaussian::McConfig>& mc, int trials) {
  if (ops.empty()) throw EmptyFamily("R-bound of an empty operator family");
  const int m = space.dim;
  for (const auto& t : ops) {
    if (t.rows() != m || t.cols() != m) {
      throw DimensionMismatch("operator family member is " + std::to_string(t.rows()) + "x" +
                              std::to_string(t.cols()) + " on a dim-" + std::to_string(m) +
                              " space");
    }
  }
  double sup_norm = 0.0;
  for (const auto& t : ops) sup_norm = std::max(sup_norm, linalg::operator_norm2(t));

  RBoundEstimate est;
  if (space.is_l2()) {
    // Rademacher orthogonality on l2: E||sum eps_k T_k x_k||^2 =
    // sum ||T_k x_k||^2, so the R-bound of a finite family is exactly the
    // largest operator norm.
    est.lower = est.upper = sup_norm;
    est.exact = true;
    return est;
  }

  est.exact = false;
  est.upper = sup_norm * space.l2_to_p() * space.p_to_l2();
  est.trials = trials;

  const gaussian::McConfig cfg = mc.value_or(gaussian::McConfig{});
  rng::Stream st(rng::derive_seed(cfg.seed, "rbound-tuples"));
  const int n = int(ops.size());
  double best = 0.0;
  double best_se = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    MatrixXcd xs(m, n), ys(m, n);
    for (int k = 0; k < n; ++k) {
      VectorXcd v(m);
      for (int j = 0; j < m; ++j) v[j] = complex<double>(st.normal(), st.normal());
      xs.col(k) = v;
      ys.col(k) = ops[size_t(k)] * v;
    }
    // Same sign draws upstairs and downstairs: the ratio estimator shares one
    // derived seed per trial.
    gaussian::McConfig trial_cfg = cfg;
    trial_cfg.seed = rng::derive_seed(cfg.seed, ("rbound-trial-" + std::to_string(trial)).c_str());
    const auto num = gaussian::rademacher_sum_norm(ys, space, trial_cfg);
    const auto den = gaussian::rademacher_sum_norm(xs, space, trial_cfg);
    if (den.value < 1e-14) continue;
    const double ratio = num.value / den.value;
    if (ratio > best) {
      best = ratio;
      const double rel_num = num.value > 0 ? num.std_error / num.value : 0.0;
      const double rel_den = den.std_error / den.value;
      best_se = ratio * std::hypot(rel_num, rel_den);
    }
  }
  est.lower = best;
  est.lower_std_error = best_se;
  return est;
}

namespace {

double resolvent_norm_at(const Generator& gen, double re, double im) {
  return linalg::operator_norm2(resolvent(gen, complex<double>(re, im)));
}

// Symmetric grid: dense linear core out to the matrix scale, geometric tails
// beyond it.
std::vector<double> line_grid(double core, double reach, int core_points, int tail_points) {
  std::set<double> ims;
  for (int j = 0; j < core_points; ++j) {
    ims.insert(-core + 2.0 * core * double(j) / double(core_points - 1));
  }
  const double ratio = std::pow(reach / core, 1.0 / double(tail_points));
  double s = core;
  for (int j = 0; j < tail_points; ++j) {
    s *= ratio;
    ims.insert(s);
    ims.insert(-s);
  }
  return {ims.begin(), ims.end()};
}

}  // namespace

double sup_resolvent_norm_on_line(const Generator& gen, double re, double rel_tol,
                                  int* grid_points) {
  for (int i = 0; i < gen.spectrum.size(); ++i) {
    if (std::abs(re - gen.spectrum[i].real()) <= 1e-12 * std::max(1.0, std::abs(re))) {
      throw SpectrumHit("vertical line Re = " + std::to_string(re) + " meets the spectrum");
    }
  }
  const double norm_a = linalg::operator_norm2(gen.a);
  const double core = norm_a + std::abs(re) + 1.0;
  double reach = std::max(10.0, 2.0 * core);

  std::vector<double> ims = line_grid(core, reach, 65, 16);
  std::vector<double> vals(ims.size());
  for (size_t j = 0; j < ims.size(); ++j) vals[j] = resolvent_norm_at(gen, re, ims[j]);

  double sup = *std::max_element(vals.begin(), vals.end());
  for (int round = 0; round < 24; ++round) {
    // Beyond the reach, ||R|| <= 1/(|lambda| - ||A||); extend until that tail
    // cannot compete with the measured sup.
    const double tail = 1.0 / (std::hypot(reach, re) - norm_a);
    if (tail > sup) {
      double s = reach;
      reach *= 4.0;
      const double ratio = std::pow(reach / s, 1.0 / 8.0);
      for (int j = 0; j < 8; ++j) {
        s *= ratio;
        ims.push_back(s);
        vals.push_back(resolvent_norm_at(gen, re, s));
        ims.push_back(-s);
        vals.push_back(resolvent_norm_at(gen, re, -s));
      }
      sup = std::max(sup, *std::max_element(vals.end() - 16, vals.end()));
      continue;
    }
    // Midpoint refinement until the sup stabilizes.
    std::vector<size_t> order(ims.size());
    for (size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return ims[a] < ims[b]; });
    std::vector<double> next_ims, next_vals;
    next_ims.reserve(2 * ims.size());
    next_vals.reserve(2 * ims.size());
    double refined = sup;
    for (size_t j = 0; j < order.size(); ++j) {
      next_ims.push_back(ims[order[j]]);
      next_vals.push_back(vals[order[j]]);
      if (j + 1 < order.size()) {
        const double mid = 0.5 * (ims[order[j]] + ims[order[j + 1]]);
        const double v = resolvent_norm_at(gen, re, mid);
        next_ims.push_back(mid);
        next_vals.push_back(v);
        refined = std::max(refined, v);
      }
    }
    ims = std::move(next_ims);
    vals = std::move(next_vals);
    const bool settled = refined <= sup * (1.0 + rel_tol);
    sup = std::max(sup, refined);
    if (settled) {
      if (grid_points) *grid_points = int(ims.size());
      return sup;
    }
  }
  throw GridTooCoarse("resolvent line sup did not stabilize on Re = " + std::to_string(re));
}

LaplaceRboundReport rbound_laplace_check(const Generator& gen, double delta,
                                         const std::optional<gaussian::McConfig>& mc,
                                         int im_points, int interior_points) {
  if (!(delta > 0.0)) throw ValidationError("Laplace R-bound check needs delta > 0");
  require_stable(gen, "Laplace R-bound check");

  LaplaceRboundReport report;
  report.delta = delta;

  // ||Theta||_gamma for Theta = T(.): on l2 this is the Hilbert-Schmidt orbit
  // integral, trace of the observability Gramian.
  if (gen.space.is_l2()) {
    report.theta_gamma_norm = std::sqrt(std::max(0.0, std::real(observability_gramian(gen).trace())));
    report.theta_std_error = 0.0;
  } else {
    const int m = gen.dim();
    const int points = 257;
    MatrixXcd family(m, 0);
    for (int k = 0; k < m; ++k) {
      const DiscretizedOrbit orbit =
          discretize_orbit(gen, VectorXcd::Unit(m, k), orbit_horizon(gen), points);
      const MatrixXcd scaled = scaled_orbit_family(orbit);
      family.conservativeResize(m, family.cols() + scaled.cols());
      family.rightCols(scaled.cols()) = scaled;
    }
    const auto est = gaussian::gaussian_sum_norm(family, gen.space, mc);
    report.theta_gamma_norm = est.value;
    report.theta_std_error = est.std_error;
  }
  report.bound = laplace_rbound_constant() * report.theta_gamma_norm / std::sqrt(delta);

  const double norm_a = linalg::operator_norm2(gen.a);
  const double core = norm_a + delta + 1.0;
  const std::vector<double> ims = line_grid(core, std::max(10.0, 4.0 * core), im_points, 12);
  std::vector<MatrixXcd> family;
  family.reserve(ims.size());
  for (double s : ims) family.push_back(resolvent(gen, complex<double>(delta, s)));
  report.grid_points = int(family.size());
  report.rbound = rbound_estimate(family, gen.space, mc);

  // The boundary carries the half-plane sup; interior samples double-check.
  rng::Stream st(rng::derive_seed(mc ? mc->seed : 0, "laplace-interior"));
  double interior = 0.0;
  for (int k = 0; k < interior_points; ++k) {
    const double re = delta + st.uniform() * (2.0 * core);
    const double im = (st.uniform() - 0.5) * (4.0 * core);
    interior = std::max(interior, resolvent_norm_at(gen, re, im));
  }
  report.interior_max = interior;

  const double slack = 3.0 * report.rbound.lower_std_error +
                       3.0 * laplace_rbound_constant() * report.theta_std_error / std::sqrt(delta);
  report.pass = report.rbound.lower <= report.bound + slack && interior <= report.bound + slack;
  return report;
}

ResolventGammaCheck resolvent_gamma_estimate(const Generator& gen, const VectorXcd& y,
                                             double sigma, double delta, double rho, int n_half,
                                             const std::optional<gaussian::McConfig>& mc) {
  if (y.size() != gen.dim()) {
    throw DimensionMismatch("test vector has dim " + std::to_string(y.size()) +
                            ", generator expects " + std::to_string(gen.dim()));
  }
  if (!(sigma > 0.0)) throw ValidationError("lattice abscissa sigma must be positive");
  if (!(delta > 0.0)) throw ValidationError("lattice spacing delta must be positive");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ValidationError("lattice offset rho must lie in [0, 1]");
  if (n_half < 0) throw ValidationError("lattice half-width must be >= 0");

  const int n = 2 * n_half + 1;
  MatrixXcd family(gen.dim(), n);
  for (int k = -n_half; k <= n_half; ++k) {
    const complex<double> lambda(sigma, -(double(k) + rho) * delta);
    family.col(k + n_half) = resolvent(gen, lambda) * y;
  }
  std::optional<gaussian::McConfig> lhs_mc = mc;
  if (lhs_mc) lhs_mc->seed = rng::derive_seed(lhs_mc->seed, "resolvent-lattice");
  const auto lhs = gaussian::gaussian_sum_norm(family, gen.space, lhs_mc);

  const UniformOrbitBound m_bound = uniform_orbit_bound(gen, mc);
  const double rhs =
      std::sqrt(laplace_rbound_constant() / delta) * m_bound.value * gen.space.norm(y);

  ResolventGammaCheck out;
  out.check.lhs = lhs.value;
  out.check.lhs_std_error = lhs.std_error;
  out.check.rhs = rhs;
  out.check.rhs_std_error = 0.0;
  out.check.margin = rhs - lhs.value;
  const double slack = 3.0 * lhs.std_error + 1e-12 * std::max(1.0, std::max(lhs.value, rhs));
  out.check.violated = lhs.value - rhs > slack;
  out.orbit_bound_m = m_bound.value;
  out.family_size = n;
  return out;
}

StabilityCertificate resolvent_rbound_datko(const Generator& gen, const CertificateConfig& config,
                                            const std::optional<gaussian::McConfig>& mc) {
  require_stable(gen, "stability certificate");

  StabilityCertificate cert;
  cert.s_numeric = gen.spectral_abscissa;
  cert.orbit_bound_m = uniform_orbit_bound(gen, mc).value;
  cert.c = laplace_rbound_constant() * cert.orbit_bound_m;
  cert.epsilon0 = 1.0 / (4.0 * cert.c * cert.c);

  // The chain certifies s(A) <= -epsilon0; a numerical abscissa to the right
  // of that means the certificate itself is wrong, not merely loose.
  if (cert.s_numeric > -cert.epsilon0 * (1.0 - 1e-9)) {
    throw ConservativenessViolation(
        "certified margin epsilon0 = " + std::to_string(cert.epsilon0) +
        " exceeds the numerical spectral gap " + std::to_string(-cert.s_numeric));
  }

  std::vector<double> ladder = config.delta_ladder;
  if (ladder.empty()) {
    const double lo = cert.epsilon0;
    const double hi = std::max(1.0, linalg::operator_norm2(gen.a));
    const int rungs = 6;
    for (int j = 0; j <= rungs; ++j) {
      ladder.push_back(lo * std::pow(hi / lo, double(j) / double(rungs)));
    }
  }
  for (double delta : ladder) {
    if (!(delta > 0.0)) throw ValidationError("R-bound profile deltas must be positive");
    cert.rbound_profile.emplace_back(
        delta, sup_resolvent_norm_on_line(gen, delta, config.line_rel_tol));
  }

  for (double f : config.epsilon_fractions) {
    if (!(f > 0.0 && f < 1.0)) {
      throw ValidationError("epsilon fractions must lie strictly between 0 and 1");
    }
    LineRBound line;
    line.epsilon = f * cert.epsilon0;
    line.grid_sup = sup_resolvent_norm_on_line(gen, -line.epsilon, config.line_rel_tol);
    line.posterior_bound = 1.0 / (cert.epsilon0 - line.epsilon);
    line.within = line.grid_sup <= line.posterior_bound * (1.0 + 1e-9);
    cert.line_rbound.push_back(line);
  }
  return cert;
}

NeumannResult neumann_resolvent(const Generator& gen, complex<double> lambda, double epsilon0,
                                int terms) {
  if (!(epsilon0 > 0.0)) throw ValidationError("Neumann base offset epsilon0 must be positive");
  if (terms < 1) throw ValidationError("Neumann series needs at least one term");
  const double alpha = lambda.real();
  const MatrixXcd base = resolvent(gen, complex<double>(epsilon0, lambda.imag()));
  const double base_norm = linalg::operator_norm2(base);
  // Signed shift: the expansion works on both sides of Re lambda = epsilon0,
  // only |shift| ||R|| decides convergence.
  const double shift = epsilon0 - alpha;
  const double ratio = std::abs(shift) * base_norm;
  if (ratio >= 1.0) {
    throw SeriesDiverges("Neumann ratio " + std::to_string(ratio) +
                         " at Re(lambda) = " + std::to_string(alpha) + "; the series needs " +
                         "|epsilon0 - Re lambda| ||R(epsilon0 + i Im lambda)|| < 1");
  }

  NeumannResult out;
  out.ratio = ratio;
  out.terms = terms;
  MatrixXcd power = base;  // R(mu)^{n+1} at term n
  MatrixXcd sum = base;
  double coef = 1.0;
  for (int n = 1; n < terms; ++n) {
    power = power * base;
    coef *= shift;
    sum += coef * power;
  }
  out.value = std::move(sum);
  out.posterior_bound = base_norm * std::pow(ratio, terms) / (1.0 - ratio);
  return out;
}

}  // namespace gstab::semigroup
