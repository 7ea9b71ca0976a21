#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "doctest.h"
#include "gstab/errors.hpp"
#include "gstab/report.hpp"
#include "gstab/run.hpp"
#include "gstab/spec_io.hpp"

using namespace gstab;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// Scratch directory per test-process run; files carry unique names so
// parallel ctest invocations cannot collide.
fs::path scratch_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() /
             ("gstab-cli-test-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_scratch(const std::string& name, const std::string& content) {
  const fs::path p = scratch_dir() / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("spec matrices parse in flat and nested layouts") {
  const json flat = json::parse(R"([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])");
  const auto a = spec_io::parse_matrix(flat, 2, 3, "A");
  CHECK(a(0, 2) == std::complex<double>(3.0, 0.0));
  CHECK(a(1, 0) == std::complex<double>(4.0, 0.0));

  const json nested = json::parse(R"([[1.0, 2.0], [3.0, 4.0]])");
  const auto b = spec_io::parse_matrix(nested, 2, 2, "B");
  CHECK(b(1, 1) == std::complex<double>(4.0, 0.0));

  // Complex entries as [re, im] pairs, in both layouts.
  const json cplx = json::parse(R"([[0.0, 1.0], [2.0, -3.0]])");
  // 2x2 would read this as nested rows of numbers; 1x2 must read it as a flat
  // row of complex entries.
  const auto c = spec_io::parse_matrix(cplx, 1, 2, "C");
  CHECK(c(0, 0) == std::complex<double>(0.0, 1.0));
  CHECK(c(0, 1) == std::complex<double>(2.0, -3.0));

  const json mixed = json::parse(R"([[[0.0, 1.0], 2.0]])");
  const auto d = spec_io::parse_matrix(mixed, 1, 2, "D");
  CHECK(d(0, 0) == std::complex<double>(0.0, 1.0));
  CHECK(d(0, 1) == std::complex<double>(2.0, 0.0));

  CHECK_THROWS_AS(spec_io::parse_matrix(flat, 2, 2, "A"), ValidationError);
  CHECK_THROWS_AS(spec_io::parse_matrix(json::parse("[[1.0],[2.0,3.0]]"), 2, 2, "A"),
                  ValidationError);
}

TEST_CASE("spec parsing validates the schema") {
  const auto ok = spec_io::parse_spec(R"({
    "system": {"m": 2, "d": 1, "A": [[-1.0, 0.5], [0.0, -2.0]], "B": [[1.0], [0.0]],
               "space": {"norm": "lp", "p": 4.0}},
    "mc": {"samples": 5000, "seed": 3},
    "analyses": ["invariant_measure", {"name": "solution_exists", "t_max": 2.5}]
  })");
  REQUIRE(ok.system.has_value());
  CHECK(ok.system->m == 2);
  CHECK(ok.system->has_b);
  CHECK(!ok.system->space.is_l2());
  CHECK(ok.mc.samples == 5000);
  REQUIRE(ok.analyses.size() == 2);
  CHECK(ok.analyses[0].name == "invariant_measure");
  CHECK(ok.analyses[1].name == "solution_exists");
  CHECK(ok.analyses[1].params.at("t_max") == 2.5);

  // Defaults fill the untouched sections.
  const auto bare = spec_io::parse_spec(R"({"frames": {"a": 0.7}})");
  REQUIRE(bare.frames.has_value());
  CHECK(bare.frames->a == 0.7);
  CHECK(bare.frames->n_max == 63);
  CHECK(bare.mc.samples == 100000);
  CHECK(bare.analyses.empty());

  CHECK_THROWS_AS(spec_io::parse_spec(R"({"system": {"m": 0, "A": []}})"), ValidationError);
  CHECK_THROWS_AS(spec_io::parse_spec(R"({"system": {"m": 1}})"), ValidationError);
  CHECK_THROWS_AS(spec_io::parse_spec(R"({"system": {"m": 1, "A": [-1.0], "d": 1}})"),
                  ValidationError);
  CHECK_THROWS_AS(
      spec_io::parse_spec(R"({"system": {"m": 1, "A": [-1.0], "space": {"norm": "sup"}}})"),
      ValidationError);
  CHECK_THROWS_AS(spec_io::parse_spec(R"({"frames": {"a": -0.5}})"), ValidationError);
  CHECK_THROWS_AS(spec_io::parse_spec(R"({"mc": {"samples": 0}})"), ValidationError);

  // Malformed JSON reports the offending line.
  try {
    spec_io::parse_spec("{\n  \"system\": {\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("reports write atomically and round-trip") {
  spec_io::SpecFile spec;
  spec.raw = json{{"hello", "world"}};
  json doc = report::make_base("frames", spec, 17, 1234);
  CHECK(doc["tool"] == "gamma-stab");
  CHECK(doc["seed"] == 17);
  CHECK(doc["constants"]["c_univ"]["value"].get<double>() ==
        doctest::Approx(6.2949407485269555).epsilon(1e-15));
  doc["analyses"].push_back({{"name", "probe"}, {"pass", true}});
  doc["pass"] = true;

  const fs::path out = scratch_dir() / "roundtrip.json";
  report::write_atomic(doc, out.string());
  CHECK(!fs::exists(out.string() + ".tmp"));
  const json back = load_json(out);
  CHECK(back == doc);
  CHECK(back["input_spec"]["hello"] == "world");

  // Method tags.
  gaussian::GaussianSumEstimate mc;
  mc.value = 1.5;
  mc.std_error = 0.01;
  mc.samples = 640;
  mc.exact = false;
  CHECK(report::estimate(mc)["method"] == "monte-carlo");
  gaussian::GaussianSumEstimate ex;
  ex.value = 2.0;
  CHECK(report::estimate(ex)["method"] == "exact");
  CHECK(report::quadrature(3.0, 41)["grid_points"] == 41);
}

TEST_CASE("execute runs the scalar invariant measure spec") {
  const auto spec = write_scratch("scalar.json", R"({
    "system": {"m": 1, "d": 1, "A": [-1.0], "B": [1.0], "space": {"norm": "l2"}},
    "mc": {"samples": 10000, "seed": 42},
    "analyses": ["invariant_measure"]
  })");
  const fs::path out = scratch_dir() / "scalar_report.json";

  run::Options opt;
  opt.subcommand = "scp";
  opt.spec_path = spec.string();
  opt.out_path = out.string();
  CHECK(run::execute(opt) == 0);

  const json rep = load_json(out);
  CHECK(rep["pass"] == true);
  CHECK(rep["subcommand"] == "scp");
  CHECK(rep["seed"] == 42);
  const json& an = rep["analyses"][0];
  CHECK(an["name"] == "invariant_measure");
  CHECK(an["exists"] == true);
  CHECK(an["unique"] == true);
  CHECK(an["covariance"][0][0].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(an["gamma_norm"]["method"] == "exact");
  CHECK(an["gamma_norm"]["value"].get<double>() ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("execute reports the unstable rotation instead of certifying it") {
  const auto spec = write_scratch("rotation.json", R"({
    "system": {"m": 2, "A": [[0.0, 1.0], [-1.0, 0.0]], "space": {"norm": "l2"}}
  })");
  const fs::path out = scratch_dir() / "rotation_report.json";

  run::Options opt;
  opt.subcommand = "stability";
  opt.spec_path = spec.string();
  opt.out_path = out.string();
  CHECK(run::execute(opt) == 2);

  const json rep = load_json(out);
  CHECK(rep["pass"] == false);
  const json& cert = rep["analyses"][0];
  CHECK(cert["name"] == "stability_certificate");
  CHECK(cert["status"] == "error");
  CHECK(cert["code"] == "not_stable");
  // The failed run still explains what it found on the axis.
  CHECK(cert["spectral_abscissa"]["value"].get<double>() == 0.0);
  const std::string msg = cert["message"].get<std::string>();
  CHECK(msg.find("abscissa") != std::string::npos);
}

TEST_CASE("execute rejects bad input without writing a report") {
  const fs::path out = scratch_dir() / "never_written.json";
  run::Options opt;
  opt.subcommand = "scp";
  opt.out_path = out.string();

  opt.spec_path = write_scratch("broken.json", "{\"system\": {").string();
  CHECK_THROWS_AS(run::execute(opt), ParseError);
  CHECK(!fs::exists(out));

  opt.spec_path = write_scratch("unknown_analysis.json", R"({
    "system": {"m": 1, "A": [-1.0]},
    "analyses": ["fourier_side_channel"]
  })").string();
  CHECK_THROWS_AS(run::execute(opt), ValidationError);
  CHECK(!fs::exists(out));

  opt.spec_path = write_scratch("missing_b.json", R"({
    "system": {"m": 1, "A": [-1.0]},
    "analyses": ["invariant_measure"]
  })").string();
  CHECK_THROWS_AS(run::execute(opt), ValidationError);
  CHECK(!fs::exists(out));

  opt.spec_path = write_scratch("missing_frames.json", R"({
    "system": {"m": 1, "A": [-1.0]}
  })").string();
  opt.subcommand = "frames";
  CHECK_THROWS_AS(run::execute(opt), ValidationError);
  CHECK(!fs::exists(out));

  CHECK_THROWS_AS(run::execute(run::Options{}), ValidationError);
}

TEST_CASE("analysis parameters reach the runners") {
  const auto spec = write_scratch("params.json", R"({
    "system": {"m": 2, "d": 1, "A": [[-1.0, 0.0], [0.0, -2.0]], "B": [[1.0], [1.0]],
               "space": {"norm": "l2"}},
    "analyses": [
      {"name": "solution_norm", "t_max": 1.0},
      {"name": "perturbed_invariant_measure", "P": [[0.1, 0.0], [0.0, 0.1]]},
      {"name": "bounded_perturbation_solution", "P": [[0.1, 0.0], [0.0, 0.1]], "t_max": 2.0}
    ]
  })");
  const fs::path out = scratch_dir() / "params_report.json";
  run::Options opt;
  opt.subcommand = "scp";
  opt.spec_path = spec.string();
  opt.out_path = out.string();
  CHECK(run::execute(opt) == 0);

  const json rep = load_json(out);
  CHECK(rep["analyses"][0]["horizon"] == 1.0);
  CHECK(rep["analyses"][1]["perturbed_measure"]["exists"] == true);
  CHECK(rep["analyses"][2]["horizon"] == 2.0);
  CHECK(rep["analyses"][2]["ratio"].get<double>() > 1.0);

  // Bad parameter values are rejected up front.
  const auto bad = write_scratch("bad_params.json", R"({
    "system": {"m": 1, "d": 1, "A": [-1.0], "B": [1.0]},
    "analyses": [{"name": "solution_norm", "t_max": -3.0}]
  })");
  opt.spec_path = bad.string();
  opt.out_path = (scratch_dir() / "bad_params_report.json").string();
  CHECK_THROWS_AS(run::execute(opt), ValidationError);
}

// Everything below drives the installed binary the way a user would.
#ifdef GSTAB_CLI_PATH

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GSTAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("binary exit codes match the report semantics") {
  const auto spec = write_scratch("cli_scalar.json", R"({
    "system": {"m": 1, "d": 1, "A": [-1.0], "B": [1.0]},
    "mc": {"samples": 5000, "seed": 1},
    "analyses": ["invariant_measure", "solution_exists"]
  })");
  const fs::path out = scratch_dir() / "cli_scalar_report.json";
  CHECK(run_cli("scp --spec " + spec.string() + " --out " + out.string()) == 0);
  CHECK(load_json(out)["pass"] == true);

  const auto rot = write_scratch("cli_rotation.json", R"({
    "system": {"m": 2, "A": [[0.0, 1.0], [-1.0, 0.0]]}
  })");
  const fs::path rot_out = scratch_dir() / "cli_rotation_report.json";
  CHECK(run_cli("stability --spec " + rot.string() + " --out " + rot_out.string()) == 2);
  CHECK(load_json(rot_out)["pass"] == false);

  const auto broken = write_scratch("cli_broken.json", "not json");
  const fs::path broken_out = scratch_dir() / "cli_broken_report.json";
  CHECK(run_cli("scp --spec " + broken.string() + " --out " + broken_out.string()) == 1);
  CHECK(!fs::exists(broken_out));

  CHECK(run_cli("scp --out somewhere.json") == 1);       // --spec is required
  CHECK(run_cli("no_such_subcommand") == 1);
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("binary reruns with the same seed are byte-identical") {
  const auto spec = write_scratch("cli_repeat.json", R"({
    "system": {"m": 2, "d": 1, "A": [[-1.0, 0.3], [0.0, -0.5]], "B": [[1.0], [0.2]],
               "space": {"norm": "lp", "p": 3.0}},
    "mc": {"samples": 4000, "seed": 5},
    "analyses": ["solution_norm"]
  })");
  const fs::path out1 = scratch_dir() / "cli_repeat_1.json";
  const fs::path out2 = scratch_dir() / "cli_repeat_2.json";
  const std::string tail = " --seed 99 --samples 6000";
  REQUIRE(run_cli("scp --spec " + spec.string() + " --out " + out1.string() + tail) == 0);
  REQUIRE(run_cli("scp --spec " + spec.string() + " --out " + out2.string() + tail) == 0);
  const std::string r1 = slurp(out1);
  CHECK(r1 == slurp(out2));
  CHECK(!r1.empty());

  // The overrides land in the report; lp forces the Monte Carlo tag.
  const json rep = json::parse(r1);
  CHECK(rep["seed"] == 99);
  CHECK(rep["samples"] == 6000);
  CHECK(rep["analyses"][0]["solution_norm"]["method"] == "monte-carlo");
}

#endif  // GSTAB_CLI_PATH
