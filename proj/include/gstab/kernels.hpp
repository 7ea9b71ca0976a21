#pragma once

namespace gstab::kernels {

// Hot loop of the Monte Carlo estimators: given a family x_1..x_n in C^m and
// a batch of weight vectors, compute out[s] = || sum_k w[k][s] x_k ||_p^2.
//
// Weights are k-major with sample stride `batch` (w[k][s] = weights[k*batch + s])
// so a SIMD lane walks consecutive samples at fixed k.
//
// All implementations return bit-identical values: identical operation order,
// multiply and add kept separate (the kernel TUs compile with
// -ffp-contract=off), and only correctly-rounded sqrt. Equivalence is
// enforced by tests, so estimator output never depends on the host CPU.
struct FamilyView {
  const double* re = nullptr;  // n x m row-major; component j of x_k at re[k*m + j]
  const double* im = nullptr;  // nullptr for a real family
  int n = 0;
  int m = 0;
};

struct NormSpec {
  double p = 2.0;  // p = 2 means the Euclidean norm
};

using BlockFn = void (*)(const FamilyView& family, const NormSpec& norm,
                         const double* weights, int batch, double* out);

BlockFn scalar_kernel() noexcept;

// The kernel measurement code should use: AVX2 when the CPU supports it,
// scalar otherwise (or when overridden).
BlockFn active_kernel() noexcept;
const char* active_kernel_name() noexcept;

// Test hook. Accepts "auto", "scalar", "avx2"; returns false if the requested
// kernel is not available on this machine.
bool force_kernel(const char* name) noexcept;

}  // namespace gstab::kernels
