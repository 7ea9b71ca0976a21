#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace gstab::run {

// One CLI invocation. seed/samples/tolerance override the spec's mc section
// and the analyses' default tolerances when set.
struct Options {
  std::string subcommand;  // frames | stability | scp | verify
  std::string spec_path;   // ignored by verify
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> samples;
  std::optional<double> tolerance;
  bool timings = false;  // adds wall_seconds fields; off by default so that
                         // same-seed reruns produce byte-identical reports
};

// Runs the subcommand end to end and writes the report. Returns the process
// exit code: 0 when every analysis succeeded, 2 when the report records at
// least one failed or errored analysis. Input problems (unreadable or
// malformed spec, schema violations, unknown analysis names, sections missing
// for a requested analysis) throw ParseError or ValidationError before any
// report is written; the caller maps those to exit code 1.
int execute(const Options& opt);

}  // namespace gstab::run
