#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "gstab/gaussian.hpp"
#include "gstab/spec_io.hpp"

namespace gstab::report {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "gamma-stab";
inline constexpr const char* kToolVersion = "1.0.0";

// Report skeleton: tool identity, effective seed/samples, the universal
// constant next to the closed form it comes from, and the spec echo. Analyses are
// appended by the runner; `pass` is finalized at the end.
json make_base(const std::string& subcommand, const spec_io::SpecFile& spec, std::uint64_t seed,
               std::int64_t samples);

// Tagged numeric outputs. Every number in a report carries its method.
json exact(double value);
json quadrature(double value, int grid_points);
json monte_carlo(const gaussian::GaussianSumEstimate& est);
// Picks the tag from the estimate itself (exact short-circuits happen on l2).
json estimate(const gaussian::GaussianSumEstimate& est);

json matrix_json(const Eigen::MatrixXcd& m);

// Temp-file write followed by an atomic rename, so a crashed run never leaves
// a partial report behind.
void write_atomic(const json& doc, const std::string& out_path);

}  // namespace gstab::report
