#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gstab/space.hpp"

namespace gstab::spec_io {

using json = nlohmann::ordered_json;

// The dynamical system under analysis: A on C^m with the chosen norm, and an
// optional noise map B (m x d).
struct SystemSection {
  int m = 0;
  int d = 0;
  Eigen::MatrixXcd a;
  Eigen::MatrixXcd b;  // m x d, only when has_b
  bool has_b = false;
  SpaceSpec space = SpaceSpec::l2(1);
};

// Exponential family parameters for the frame analyses.
struct FramesSection {
  double a = 1.0;
  double rho = 0.0;
  int n_min = 0;
  int n_max = 63;
  int grid = 4096;
  int gram_size = 200;
};

struct McSection {
  std::int64_t samples = 100000;
  std::uint64_t seed = 0;
};

// One requested analysis plus its parameter object (may be empty).
struct AnalysisRequest {
  std::string name;
  json params;
};

struct SpecFile {
  std::optional<SystemSection> system;
  std::optional<FramesSection> frames;
  McSection mc;
  std::vector<AnalysisRequest> analyses;
  json raw;  // the parsed document, echoed verbatim into reports
};

// Matrices accept two layouts: a flat row-major array of entries, or an array
// of row arrays. An entry is a number or a [re, im] pair.
Eigen::MatrixXcd parse_matrix(const json& value, int rows, int cols, const std::string& field);

// ParseError on malformed JSON (with line/byte diagnostics), ValidationError
// on schema violations.
SpecFile parse_spec(const std::string& text);
SpecFile load_spec(const std::string& path);

}  // namespace gstab::spec_io
