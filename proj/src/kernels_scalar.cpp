#include "kernels_detail.hpp"

namespace gstab::kernels {

namespace {

void scalar_block(const FamilyView& f, const NormSpec& norm, const double* weights,
                  int batch, double* out) {
  const auto pl = detail::PNormPlan::make(norm.p);
  for (int s = 0; s < batch; ++s) {
    out[s] = detail::weighted_sum_pnorm_one(f, pl, weights, batch, s);
  }
}

}  // namespace

BlockFn scalar_kernel() noexcept { return &scalar_block; }

}  // namespace gstab::kernels
