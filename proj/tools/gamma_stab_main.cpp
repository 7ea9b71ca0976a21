// gamma-stab: frame constants, stability certificates, and stochastic Cauchy
// problem analyses from a JSON spec. Exit codes: 0 all analyses passed,
// 1 usage or input error (no report), 2 report written with failures.

#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "gstab/errors.hpp"
#include "gstab/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"gamma-radonifying stability toolkit"};
  app.require_subcommand(1);

  gstab::run::Options opt;
  const auto add_common = [&opt](CLI::App* cmd, bool needs_spec) {
    if (needs_spec) {
      cmd->add_option("--spec", opt.spec_path, "input spec (JSON)")->required();
    }
    cmd->add_option("--out", opt.out_path, "report output path (JSON)")->required();
    cmd->add_option("--seed", opt.seed, "override the spec's Monte Carlo seed");
    cmd->add_option("--samples", opt.samples, "override the spec's sample budget")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tolerance", opt.tolerance, "override analysis tolerances")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--timings", opt.timings,
                  "record wall-clock timings (reports stop being rerun-identical)");
  };

  add_common(app.add_subcommand("frames", "exponential family frame constants"), true);
  add_common(app.add_subcommand("stability", "resolvent bounds and stability certificates"), true);
  add_common(app.add_subcommand("scp", "invariant measures and perturbation analyses"), true);
  add_common(app.add_subcommand("verify", "built-in self checks"), false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints help or the usage error
    return rc == 0 ? 0 : 1;
  }

  opt.subcommand = app.get_subcommands().front()->get_name();
  try {
    return gstab::run::execute(opt);
  } catch (const gstab::Error& e) {
    std::cerr << "gamma-stab: " << e.code() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "gamma-stab: " << e.what() << '\n';
    return 1;
  }
}
