#include "gstab/run.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gstab/errors.hpp"
#include "gstab/frames.hpp"
#include "gstab/gaussian.hpp"
#include "gstab/report.hpp"
#include "gstab/rng.hpp"
#include "gstab/scp.hpp"
#include "gstab/semigroup.hpp"
#include "gstab/spec_io.hpp"
#include "gstab/verify.hpp"

namespace gstab::run {

namespace {

using json = nlohmann::ordered_json;
using spec_io::AnalysisRequest;
using spec_io::SpecFile;

struct Context {
  const SpecFile& spec;
  std::uint64_t seed;
  std::int64_t samples;
  std::optional<double> tolerance;
};

// Monte Carlo config for one analysis. On l2 every norm in the pipeline has
// an exact path, so no sampling budget is handed out and reports carry exact
// method tags; off l2 each analysis gets its own derived stream.
std::optional<gaussian::McConfig> mc_for(const Context& ctx, const std::string& role) {
  if (!ctx.spec.system || ctx.spec.system->space.is_l2()) return std::nullopt;
  return gaussian::McConfig{ctx.samples, rng::derive_seed(ctx.seed, "cli-" + role)};
}

semigroup::Generator make_generator(const Context& ctx) {
  const auto& sys = *ctx.spec.system;
  return semigroup::Generator(sys.a, sys.space);
}

scp::ScpProblem make_problem(const Context& ctx) {
  const auto& sys = *ctx.spec.system;
  return scp::ScpProblem(make_generator(ctx), sys.b);
}

double positive_param(const AnalysisRequest& req, const std::string& key, double fallback) {
  if (!req.params.contains(key)) return fallback;
  const auto& v = req.params.at(key);
  if (!v.is_number()) {
    throw ValidationError("analysis '" + req.name + "': parameter '" + key + "' must be a number");
  }
  const double x = v.get<double>();
  if (!(x > 0.0)) {
    throw ValidationError("analysis '" + req.name + "': parameter '" + key +
                          "' must be positive, got " + std::to_string(x));
  }
  return x;
}

double unit_param(const AnalysisRequest& req, const std::string& key, double fallback) {
  if (!req.params.contains(key)) return fallback;
  const auto& v = req.params.at(key);
  if (!v.is_number()) {
    throw ValidationError("analysis '" + req.name + "': parameter '" + key + "' must be a number");
  }
  const double x = v.get<double>();
  if (x < 0.0 || x > 1.0) {
    throw ValidationError("analysis '" + req.name + "': parameter '" + key + "' must lie in [0,1]");
  }
  return x;
}

int int_param(const AnalysisRequest& req, const std::string& key, int fallback, int lo, int hi) {
  if (!req.params.contains(key)) return fallback;
  const auto& v = req.params.at(key);
  if (!v.is_number_integer()) {
    throw ValidationError("analysis '" + req.name + "': parameter '" + key +
                          "' must be an integer");
  }
  const auto x = v.get<std::int64_t>();
  if (x < lo || x > hi) {
    throw ValidationError("analysis '" + req.name + "': parameter '" + key + "' must lie in [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return int(x);
}

Eigen::MatrixXcd matrix_param(const Context& ctx, const AnalysisRequest& req,
                              const std::string& key, int rows, int cols) {
  if (!req.params.contains(key)) {
    throw ValidationError("analysis '" + req.name + "' requires parameter '" + key + "'");
  }
  (void)ctx;
  return spec_io::parse_matrix(req.params.at(key), rows, cols, "analyses." + req.name + "." + key);
}

// Method-tagged norm value assembled from the scp report fields.
json tagged_norm(double value, double std_error, bool exact, const Context& ctx) {
  gaussian::GaussianSumEstimate est;
  est.value = value;
  est.std_error = std_error;
  est.exact = exact;
  est.samples = exact ? 0 : ctx.samples;
  return report::estimate(est);
}

// ---- analysis catalog -------------------------------------------------------

std::string canonical_name(const std::string& name) {
  if (name == "invariant_measure_exists") return "invariant_measure";
  if (name == "resolvent_transform_norm") return "resolvent_transform";
  if (name == "datko_pazy_certify") return "datko_pazy";
  return name;
}

const std::vector<std::string>& known_analyses() {
  static const std::vector<std::string> names = {
      "frame_constants_cck",
      "frame_constants_gram",
      "bessel_adjudication",
      "stability_certificate",
      "laplace_rbound",
      "resolvent_lattice",
      "invariant_measure",
      "solution_exists",
      "solution_norm",
      "resolvent_transform",
      "perturbation_margin",
      "perturbed_invariant_measure",
      "bounded_perturbation_solution",
      "datko_pazy",
  };
  return names;
}

bool needs_frames(const std::string& name) { return name.rfind("frame", 0) == 0 || name == "bessel_adjudication"; }

bool needs_noise(const std::string& name) {
  return name == "invariant_measure" || name == "solution_exists" || name == "solution_norm" ||
         name == "resolvent_transform" || name == "perturbed_invariant_measure" ||
         name == "bounded_perturbation_solution";
}

std::vector<AnalysisRequest> default_requests(const std::string& subcommand) {
  std::vector<std::string> names;
  if (subcommand == "frames") {
    names = {"frame_constants_cck", "frame_constants_gram", "bessel_adjudication"};
  } else if (subcommand == "stability") {
    names = {"stability_certificate", "laplace_rbound", "resolvent_lattice"};
  } else if (subcommand == "scp") {
    names = {"invariant_measure", "solution_exists", "resolvent_transform", "perturbation_margin",
             "datko_pazy"};
  } else {
    throw ValidationError("unknown subcommand '" + subcommand + "'");
  }
  std::vector<AnalysisRequest> out;
  for (auto& n : names) out.push_back(AnalysisRequest{n, json::object()});
  return out;
}

// Rejects bad requests before anything runs: unknown names, analyses whose
// spec section is absent, malformed parameters. A spec that fails here
// produces no report at all.
void validate_request(const Context& ctx, const AnalysisRequest& req) {
  const std::string name = canonical_name(req.name);
  bool known = false;
  for (const auto& k : known_analyses()) known = known || k == name;
  if (!known) {
    std::string msg = "unknown analysis '" + req.name + "'; known analyses:";
    for (const auto& k : known_analyses()) msg += " " + k;
    throw ValidationError(msg);
  }
  if (needs_frames(name) && !ctx.spec.frames) {
    throw ValidationError("analysis '" + name + "' requires a frames section in the spec");
  }
  if (!needs_frames(name) && !ctx.spec.system) {
    throw ValidationError("analysis '" + name + "' requires a system section in the spec");
  }
  if (needs_noise(name) && !ctx.spec.system->has_b) {
    throw ValidationError("analysis '" + name + "' requires a noise map B in the system section");
  }

  const int m = ctx.spec.system ? ctx.spec.system->m : 0;
  if (name == "laplace_rbound") {
    positive_param(req, "delta", 1.0);
  } else if (name == "resolvent_lattice") {
    const double delta = positive_param(req, "delta", 1.0);
    positive_param(req, "sigma", delta);
    unit_param(req, "rho", 0.0);
    int_param(req, "n_half", 32, 0, 4096);
    if (req.params.contains("y")) matrix_param(ctx, req, "y", m, 1);
  } else if (name == "solution_exists" || name == "solution_norm") {
    positive_param(req, "t_max", 10.0);
  } else if (name == "perturbed_invariant_measure") {
    matrix_param(ctx, req, "P", m, m);
  } else if (name == "bounded_perturbation_solution") {
    matrix_param(ctx, req, "P", m, m);
    positive_param(req, "t_max", 10.0);
  }
}

// ---- runners ---------------------------------------------------------------
// Each runner fills `entry` incrementally and sets entry["pass"]; fields
// recorded before a throw survive into the error entry, which is how a failed
// stability run still reports the spectral abscissa it found.

void run_frame_constants_cck(const Context& ctx, const AnalysisRequest&, json& entry) {
  const auto& fr = *ctx.spec.frames;
  frames::ExponentialFamily fam(fr.a, fr.rho, fr.n_min, fr.n_max);
  entry["family"] = {{"a", fr.a}, {"rho", fr.rho}, {"n_min", fr.n_min}, {"n_max", fr.n_max}};
  const double rel_tol = ctx.tolerance.value_or(1e-2);
  const auto fc = frames::frame_constants_cck(fam, fr.grid, rel_tol);
  entry["c_hilbert"] = report::quadrature(fc.c_hilbert, fr.grid);
  entry["c_bessel"] = report::quadrature(fc.c_bessel, fr.grid);
  const auto closed = frames::exponential_family_constants(fr.a);
  entry["closed_form_c_hilbert"] = report::exact(closed.c_hilbert);
  entry["closed_form_c_bessel"] = report::exact(closed.c_bessel);
  entry["pass"] = true;
}

void run_frame_constants_gram(const Context& ctx, const AnalysisRequest&, json& entry) {
  const auto& fr = *ctx.spec.frames;
  frames::ExponentialFamily fam(fr.a, fr.rho, fr.n_min, fr.n_max);
  entry["family"] = {{"a", fr.a}, {"rho", fr.rho}, {"n_min", fr.n_min}, {"n_max", fr.n_max}};
  const auto fc = frames::frame_constants_gram(frames::gram_matrix(fam, fam.all_indices()));
  entry["size"] = fr.n_max - fr.n_min + 1;
  entry["c_hilbert"] = report::exact(fc.c_hilbert);
  entry["c_bessel"] = report::exact(fc.c_bessel);
  entry["pass"] = true;
}

void run_bessel_adjudication(const Context& ctx, const AnalysisRequest&, json& entry) {
  const auto& fr = *ctx.spec.frames;
  const auto adj = frames::adjudicate_bessel_constant(fr.a, fr.gram_size);
  entry["a"] = fr.a;
  entry["gram_size"] = fr.gram_size;
  entry["candidate_direct"] = report::exact(adj.candidate_direct);
  entry["candidate_essinf"] = report::exact(adj.candidate_essinf);
  entry["gram_lambda_min"] = report::exact(adj.gram_lambda_min);
  entry["selected_cb2"] = report::exact(adj.selected_cb2);
  entry["discrepancy_factor"] = adj.discrepancy_factor;
  entry["pass"] = adj.selected_cb2 == adj.candidate_essinf;
}

void run_stability_certificate(const Context& ctx, const AnalysisRequest&, json& entry) {
  const auto gen = make_generator(ctx);
  entry["spectral_abscissa"] = report::exact(gen.spectral_abscissa);
  semigroup::CertificateConfig cfg;
  if (ctx.tolerance) cfg.line_rel_tol = *ctx.tolerance;
  const auto cert = semigroup::resolvent_rbound_datko(gen, cfg, mc_for(ctx, "certificate"));
  entry["orbit_bound_m"] = cert.orbit_bound_m;
  entry["c"] = cert.c;
  entry["epsilon0"] = cert.epsilon0;
  entry["s_numeric"] = cert.s_numeric;
  json profile = json::array();
  for (const auto& [delta, sup] : cert.rbound_profile) {
    profile.push_back({{"delta", delta}, {"line_sup", sup}});
  }
  entry["rbound_profile"] = profile;
  json lines = json::array();
  bool lines_ok = true;
  for (const auto& lr : cert.line_rbound) {
    lines.push_back({{"epsilon", lr.epsilon},
                     {"grid_sup", lr.grid_sup},
                     {"posterior_bound", lr.posterior_bound},
                     {"within", lr.within}});
    lines_ok = lines_ok && lr.within;
  }
  entry["line_rbound"] = lines;
  entry["pass"] = lines_ok && cert.epsilon0 <= -cert.s_numeric + 1e-12;
}

void run_laplace_rbound(const Context& ctx, const AnalysisRequest& req, json& entry) {
  const auto gen = make_generator(ctx);
  const double delta = positive_param(req, "delta", 1.0);
  const auto rep = semigroup::rbound_laplace_check(gen, delta, mc_for(ctx, "laplace-rbound"));
  entry["delta"] = rep.delta;
  entry["rbound_lower"] = rep.rbound.lower;
  entry["rbound_upper"] = rep.rbound.upper;
  entry["rbound_exact"] = rep.rbound.exact;
  entry["theta_gamma_norm"] = rep.theta_gamma_norm;
  entry["bound"] = rep.bound;
  entry["interior_max"] = rep.interior_max;
  entry["grid_points"] = rep.grid_points;
  entry["pass"] = rep.pass;
}

void run_resolvent_lattice(const Context& ctx, const AnalysisRequest& req, json& entry) {
  const auto gen = make_generator(ctx);
  const int m = gen.dim();
  const double delta = positive_param(req, "delta", 1.0);
  const double sigma = positive_param(req, "sigma", delta);
  const double rho = unit_param(req, "rho", 0.0);
  const int n_half = int_param(req, "n_half", 32, 0, 4096);
  Eigen::VectorXcd y;
  if (req.params.contains("y")) {
    y = matrix_param(ctx, req, "y", m, 1).col(0);
  } else {
    y = Eigen::VectorXcd::Constant(m, 1.0 / std::sqrt(double(m)));
  }
  const auto rgc =
      semigroup::resolvent_gamma_estimate(gen, y, sigma, delta, rho, n_half, mc_for(ctx, "lattice"));
  entry["sigma"] = sigma;
  entry["delta"] = delta;
  entry["rho"] = rho;
  entry["family_size"] = rgc.family_size;
  entry["orbit_bound_m"] = rgc.orbit_bound_m;
  entry["lattice_gamma_norm"] = rgc.check.lhs;
  entry["bound"] = rgc.check.rhs;
  entry["margin"] = rgc.check.margin;
  entry["pass"] = !rgc.check.violated;
}

void run_invariant_measure(const Context& ctx, const AnalysisRequest&, json& entry,
                           const std::string& role = "invariant-measure") {
  const auto prob = make_problem(ctx);
  const auto rep = scp::invariant_measure_exists(prob, mc_for(ctx, role));
  entry["exists"] = rep.exists;
  entry["unique"] = rep.unique;
  entry["reachable_abscissa"] = rep.reachable_abscissa;
  entry["reachable_dim"] = rep.reachable_dim;
  if (rep.exists) {
    entry["gamma_norm"] = tagged_norm(rep.gamma_norm, rep.std_error, rep.exact, ctx);
    entry["covariance"] = report::matrix_json(rep.covariance);
  }
  entry["pass"] = rep.exists;
}

void run_solution_exists(const Context& ctx, const AnalysisRequest& req, json& entry) {
  const auto prob = make_problem(ctx);
  const double t_max = positive_param(req, "t_max", 10.0);
  const auto se = scp::solution_exists(prob, t_max, mc_for(ctx, "solution-exists"));
  entry["horizon"] = se.norm.horizon;
  entry["exists"] = se.exists;
  entry["solution_norm"] = tagged_norm(se.norm.value, se.norm.std_error, se.norm.exact, ctx);
  entry["pass"] = se.exists;
}

void run_solution_norm(const Context& ctx, const AnalysisRequest& req, json& entry) {
  const auto prob = make_problem(ctx);
  const double t_max = positive_param(req, "t_max", 10.0);
  const auto sn = scp::solution_norm(prob, t_max, mc_for(ctx, "solution-norm"));
  entry["horizon"] = sn.horizon;
  entry["solution_norm"] = tagged_norm(sn.value, sn.std_error, sn.exact, ctx);
  entry["pass"] = true;
}

void run_resolvent_transform(const Context& ctx, const AnalysisRequest&, json& entry) {
  const auto prob = make_problem(ctx);
  const double rel_tol = ctx.tolerance.value_or(1e-6);
  const auto f = scp::resolvent_transform_norm(prob, rel_tol);
  entry["value"] = report::quadrature(f.value, f.grid_points);
  entry["time_domain_value"] = report::exact(f.time_domain_value);
  entry["rel_gap"] = f.rel_gap;
  entry["tail_bound"] = f.tail_bound;
  // Plancherel self-check: the two routes must agree to quadrature accuracy.
  entry["pass"] = f.rel_gap <= 100.0 * rel_tol;
}

void run_perturbation_margin(const Context& ctx, const AnalysisRequest&, json& entry) {
  const auto gen = make_generator(ctx);
  const auto pm = scp::perturbation_margin(gen);
  entry["margin"] = report::quadrature(pm.margin, pm.grid_points);
  entry["axis_sup"] = report::quadrature(pm.axis_sup, pm.grid_points);
  entry["pass"] = pm.margin > 0.0;
}

void run_perturbed_invariant_measure(const Context& ctx, const AnalysisRequest& req, json& entry) {
  const auto prob = make_problem(ctx);
  const auto p = matrix_param(ctx, req, "P", prob.state_dim(), prob.state_dim());
  const auto rep = scp::perturbed_invariant_measure_check(prob, p, mc_for(ctx, "perturbed"));
  entry["delta_margin"] = rep.delta_margin;
  entry["perturbation_norm"] = rep.perturbation_norm;
  entry["contraction_c"] = rep.contraction_c;
  entry["norm_inflation"] = rep.norm_inflation;
  entry["base_axis_sup"] = rep.base_axis_sup;
  entry["perturbed_axis_sup"] = rep.perturbed_axis_sup;
  entry["axis_within"] = rep.axis_within;
  entry["base_transform_norm"] = rep.base_transform_norm;
  entry["perturbed_transform_norm"] = rep.perturbed_transform_norm;
  entry["transform_within"] = rep.transform_within;
  entry["covariance_shift"] = rep.covariance_shift;
  json nested;
  nested["exists"] = rep.perturbed_report.exists;
  nested["unique"] = rep.perturbed_report.unique;
  if (rep.perturbed_report.exists) {
    nested["gamma_norm"] = tagged_norm(rep.perturbed_report.gamma_norm,
                                       rep.perturbed_report.std_error,
                                       rep.perturbed_report.exact, ctx);
    nested["covariance"] = report::matrix_json(rep.perturbed_report.covariance);
  }
  entry["perturbed_measure"] = nested;
  entry["pass"] = rep.axis_within && rep.transform_within && rep.perturbed_report.exists;
}

void run_bounded_perturbation_solution(const Context& ctx, const AnalysisRequest& req,
                                       json& entry) {
  const auto prob = make_problem(ctx);
  const auto p = matrix_param(ctx, req, "P", prob.state_dim(), prob.state_dim());
  const double t_max = positive_param(req, "t_max", 10.0);
  const auto rep = scp::bounded_perturbation_solution(prob, p, t_max, mc_for(ctx, "bounded-pert"));
  entry["omega1"] = rep.omega1;
  entry["halfplane_rbound"] = rep.halfplane_rbound;
  entry["contraction"] = rep.contraction;
  entry["perturbation_norm"] = rep.perturbation_norm;
  entry["neumann_max_rel_error"] = rep.neumann_max_rel_error;
  entry["neumann_terms"] = rep.neumann_terms;
  entry["base_norm"] = tagged_norm(rep.base.value, rep.base.std_error, rep.base.exact, ctx);
  entry["perturbed_norm"] =
      tagged_norm(rep.perturbed.value, rep.perturbed.std_error, rep.perturbed.exact, ctx);
  entry["ratio"] = rep.ratio;
  entry["horizon"] = rep.horizon;
  entry["pass"] = rep.contraction < 1.0 && rep.neumann_max_rel_error < 1e-6;
}

void run_datko_pazy(const Context& ctx, const AnalysisRequest&, json& entry) {
  const auto gen = make_generator(ctx);
  entry["spectral_abscissa"] = report::exact(gen.spectral_abscissa);
  const auto cert = scp::datko_pazy_certify(gen, mc_for(ctx, "datko-pazy"));
  entry["epsilon"] = cert.epsilon;
  entry["margin"] = cert.margin;
  entry["certificate"] = {{"orbit_bound_m", cert.certificate.orbit_bound_m},
                          {"c", cert.certificate.c},
                          {"epsilon0", cert.certificate.epsilon0},
                          {"s_numeric", cert.certificate.s_numeric}};
  entry["shifted_norms_finite"] = cert.shifted_norms_finite;
  entry["shifted_orbit_bound"] = cert.shifted_orbit_bound;
  entry["decay_rate"] = cert.decay_rate;
  entry["decay_consistent"] = cert.decay_consistent;
  entry["rank_one_max"] = cert.rank_one_max;
  entry["rank_one_trials"] = cert.rank_one_trials;
  entry["rank_one_within"] = cert.rank_one_within;
  entry["rank_one_measures_exist"] = cert.rank_one_measures_exist;
  entry["pass"] = cert.epsilon > 0.0 && cert.shifted_norms_finite && cert.decay_consistent &&
                  cert.rank_one_within && cert.rank_one_measures_exist;
}

void run_analysis(const Context& ctx, const AnalysisRequest& req, json& entry) {
  const std::string name = canonical_name(req.name);
  if (name == "frame_constants_cck") return run_frame_constants_cck(ctx, req, entry);
  if (name == "frame_constants_gram") return run_frame_constants_gram(ctx, req, entry);
  if (name == "bessel_adjudication") return run_bessel_adjudication(ctx, req, entry);
  if (name == "stability_certificate") return run_stability_certificate(ctx, req, entry);
  if (name == "laplace_rbound") return run_laplace_rbound(ctx, req, entry);
  if (name == "resolvent_lattice") return run_resolvent_lattice(ctx, req, entry);
  if (name == "invariant_measure") return run_invariant_measure(ctx, req, entry);
  if (name == "solution_exists") return run_solution_exists(ctx, req, entry);
  if (name == "solution_norm") return run_solution_norm(ctx, req, entry);
  if (name == "resolvent_transform") return run_resolvent_transform(ctx, req, entry);
  if (name == "perturbation_margin") return run_perturbation_margin(ctx, req, entry);
  if (name == "perturbed_invariant_measure")
    return run_perturbed_invariant_measure(ctx, req, entry);
  if (name == "bounded_perturbation_solution")
    return run_bounded_perturbation_solution(ctx, req, entry);
  if (name == "datko_pazy") return run_datko_pazy(ctx, req, entry);
  throw ValidationError("unknown analysis '" + req.name + "'");
}

int run_verify(const Options& opt) {
  const std::uint64_t seed = opt.seed.value_or(0);
  SpecFile empty;
  empty.raw = json::object();
  json doc = report::make_base("verify", empty, seed, opt.samples.value_or(0));
  const auto results = verify::run_all(seed);
  bool all_pass = true;
  json& analyses = doc["analyses"];
  for (const auto& c : results) {
    json entry;
    entry["criterion"] = c.id;
    entry["name"] = c.name;
    entry["pass"] = c.pass;
    entry["detail"] = c.detail;
    if (opt.timings) entry["wall_seconds"] = c.seconds;
    analyses.push_back(entry);
    all_pass = all_pass && c.pass;
  }
  doc["pass"] = all_pass;
  report::write_atomic(doc, opt.out_path);
  return all_pass ? 0 : 2;
}

}  // namespace

int execute(const Options& opt) {
  if (opt.out_path.empty()) throw ValidationError("an output path is required");
  if (opt.subcommand == "verify") return run_verify(opt);

  const SpecFile spec = spec_io::load_spec(opt.spec_path);
  const std::uint64_t seed = opt.seed.value_or(spec.mc.seed);
  const std::int64_t samples = opt.samples.value_or(spec.mc.samples);
  if (samples <= 0) throw ValidationError("samples must be positive");
  if (opt.tolerance && !(*opt.tolerance > 0.0)) {
    throw ValidationError("tolerance must be positive");
  }
  const Context ctx{spec, seed, samples, opt.tolerance};

  const std::vector<AnalysisRequest> requests =
      spec.analyses.empty() ? default_requests(opt.subcommand) : spec.analyses;
  for (const auto& req : requests) validate_request(ctx, req);

  json doc = report::make_base(opt.subcommand, spec, seed, samples);
  bool all_ok = true;
  json& analyses = doc["analyses"];
  for (const auto& req : requests) {
    json entry;
    entry["name"] = canonical_name(req.name);
    entry["status"] = "ok";
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run_analysis(ctx, req, entry);
    } catch (const AnalysisError& e) {
      entry["status"] = "error";
      entry["code"] = e.code();
      entry["message"] = e.what();
      entry["pass"] = false;
    }
    if (opt.timings) {
      entry["wall_seconds"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    all_ok = all_ok && entry["pass"].get<bool>();
    analyses.push_back(entry);
  }
  doc["pass"] = all_ok;
  report::write_atomic(doc, opt.out_path);
  return all_ok ? 0 : 2;
}

}  // namespace gstab::run
