#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gstab::verify {

// One verification criterion outcome. `detail` is a deterministic one-line
// numeric summary; `seconds` is wall time and must stay out of deterministic
// reports.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

// The eleven in-process criteria (the twelfth, byte-identical reruns of the
// CLI itself, can only be checked from outside). Never throws: a criterion
// that raises is reported as failed with the message in `detail`.
CriterionResult run_criterion(int id, std::uint64_t seed);
std::vector<CriterionResult> run_all(std::uint64_t seed);

}  // namespace gstab::verify
