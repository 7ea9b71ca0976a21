#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gstab {

// Root of the toolkit's error taxonomy. `code` is a stable machine-readable
// tag that ends up in failure reports; what() carries the human-readable text.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what_arg)
      : std::runtime_error(what_arg), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Malformed input files. CLI exit status 1, no report written.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& w) : Error("parse_error", w) {}
};

// Well-formed input that violates an operation's contract (bad dimensions,
// out-of-range parameters). CLI exit status 1, no report written.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& w) : Error("validation_error", w) {}
  ValidationError(std::string code, const std::string& w) : Error(std::move(code), w) {}
};

class DimensionMismatch : public ValidationError {
 public:
  explicit DimensionMismatch(const std::string& w) : ValidationError("dimension_mismatch", w) {}
};

class NonPositiveDecay : public ValidationError {
 public:
  explicit NonPositiveDecay(const std::string& w) : ValidationError("non_positive_decay", w) {}
};

class EmptyIndexSet : public ValidationError {
 public:
  explicit EmptyIndexSet(const std::string& w) : ValidationError("empty_index_set", w) {}
};

class EmptyFamily : public ValidationError {
 public:
  explicit EmptyFamily(const std::string& w) : ValidationError("empty_family", w) {}
};

class ExactPathUnavailable : public ValidationError {
 public:
  explicit ExactPathUnavailable(const std::string& w) : ValidationError("exact_path_unavailable", w) {}
};

// Valid input, unfavourable mathematics: the requested quantity does not
// exist, cannot be certified, or the numerics cannot reach the tolerance.
// CLI exit status 2, report written with the failure explained.
class AnalysisError : public Error {
 public:
  explicit AnalysisError(const std::string& w) : Error("analysis_error", w) {}
  AnalysisError(std::string code, const std::string& w) : Error(std::move(code), w) {}
};

class NotHermitian : public AnalysisError {
 public:
  explicit NotHermitian(const std::string& w) : AnalysisError("not_hermitian", w) {}
};

class GridTooCoarse : public AnalysisError {
 public:
  explicit GridTooCoarse(const std::string& w) : AnalysisError("grid_too_coarse", w) {}
};

class ToleranceNotAchievable : public AnalysisError {
 public:
  explicit ToleranceNotAchievable(const std::string& w) : AnalysisError("tolerance_not_achievable", w) {}
};

class DegenerateFamily : public AnalysisError {
 public:
  explicit DegenerateFamily(const std::string& w) : AnalysisError("degenerate_family", w) {}
};

class EigenSolverFailure : public AnalysisError {
 public:
  explicit EigenSolverFailure(const std::string& w) : AnalysisError("eigen_solver_failure", w) {}
};

class SpectrumHit : public AnalysisError {
 public:
  explicit SpectrumHit(const std::string& w) : AnalysisError("spectrum_hit", w) {}
};

class NotStable : public AnalysisError {
 public:
  explicit NotStable(const std::string& w) : AnalysisError("not_stable", w) {}
};

class ConservativenessViolation : public AnalysisError {
 public:
  explicit ConservativenessViolation(const std::string& w) : AnalysisError("conservativeness_violation", w) {}
};

class SeriesDiverges : public AnalysisError {
 public:
  explicit SeriesDiverges(const std::string& w) : AnalysisError("series_diverges", w) {}
};

class MarginExceeded : public AnalysisError {
 public:
  explicit MarginExceeded(const std::string& w) : AnalysisError("margin_exceeded", w) {}
};

class ShiftSearchFailed : public AnalysisError {
 public:
  explicit ShiftSearchFailed(const std::string& w) : AnalysisError("shift_search_failed", w) {}
};

}  // namespace gstab
