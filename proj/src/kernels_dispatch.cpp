#include <cstring>

#include "gstab/kernels.hpp"

namespace gstab::kernels {

#if GSTAB_HAVE_AVX2_TU
BlockFn avx2_kernel() noexcept;  // kernels_avx2.cpp
#endif

namespace {

enum class Mode { automatic, scalar, avx2 };
Mode g_mode = Mode::automatic;

bool avx2_available() noexcept {
#if GSTAB_HAVE_AVX2_TU
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

}  // namespace

BlockFn active_kernel() noexcept {
#if GSTAB_HAVE_AVX2_TU
  if (g_mode == Mode::avx2 || (g_mode == Mode::automatic && avx2_available())) {
    return avx2_kernel();
  }
#endif
  return scalar_kernel();
}

const char* active_kernel_name() noexcept {
  return active_kernel() == scalar_kernel() ? "scalar" : "avx2";
}

bool force_kernel(const char* name) noexcept {
  if (std::strcmp(name, "auto") == 0) {
    g_mode = Mode::automatic;
    return true;
  }
  if (std::strcmp(name, "scalar") == 0) {
    g_mode = Mode::scalar;
    return true;
  }
  if (std::strcmp(name, "avx2") == 0 && avx2_available()) {
    g_mode = Mode::avx2;
    return true;
  }
  return false;
}

}  // namespace gstab::kernels
