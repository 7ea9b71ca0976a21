#include "gstab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "gstab/errors.hpp"
#include "gstab/semigroup.hpp"

namespace gstab::report {

json make_base(const std::string& subcommand, const spec_io::SpecFile& spec, std::uint64_t seed,
               std::int64_t samples) {
  json doc = json::object();
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["subcommand"] = subcommand;
  doc["seed"] = seed;
  doc["samples"] = samples;
  doc["constants"] = {
      {"c_univ",
       {{"formula", "2*pi*e^{2pi}/(e^{2pi}-1)"},
        {"value", semigroup::laplace_rbound_constant()}}},
  };
  doc["input_spec"] = spec.raw;
  doc["analyses"] = json::array();
  doc["pass"] = false;
  return doc;
}

namespace {

json finite(double value) {
  // JSON has no inf/nan literals; report them as tagged strings.
  if (std::isfinite(value)) return value;
  if (std::isnan(value)) return "nan";
  return value > 0 ? "inf" : "-inf";
}

}  // namespace

json exact(double value) { return {{"value", finite(value)}, {"method", "exact"}}; }

json quadrature(double value, int grid_points) {
  return {{"value", finite(value)}, {"method", "quadrature"}, {"grid_points", grid_points}};
}

json monte_carlo(const gaussian::GaussianSumEstimate& est) {
  return {{"value", finite(est.value)},
          {"method", "monte-carlo"},
          {"std_error", est.std_error},
          {"samples", est.samples}};
}

json estimate(const gaussian::GaussianSumEstimate& est) {
  return est.exact ? exact(est.value) : monte_carlo(est);
}

json matrix_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) {
      const auto z = m(i, j);
      if (z.imag() == 0.0) {
        row.push_back(z.real());
      } else {
        row.push_back(json::array({z.real(), z.imag()}));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_atomic(const json& doc, const std::string& out_path) {
  const std::string tmp = out_path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write report file: " + tmp);
    out << doc.dump(2) << '\n';
    if (!out.good()) throw ValidationError("write failed for report file: " + tmp);
  }
  if (std::rename(tmp.c_str(), out_path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw ValidationError("cannot move report into place: " + out_path);
  }
}

}  // namespace gstab::report
