#include "gstab/rng.hpp"

#include <cmath>

namespace gstab::rng {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

// Stream tags occupy the top counter word so the normal, sign and uniform
// streams of one (seed, sample) pair never collide.
constexpr std::uint32_t kStreamNormal = 0x6e6f726du;
constexpr std::uint32_t kStreamSign = 0x7369676eu;
constexpr std::uint32_t kStreamUniform = 0x756e6966u;

inline std::array<std::uint32_t, 4> philox_round(const std::array<std::uint32_t, 4>& x,
                                                 const std::array<std::uint32_t, 2>& k) {
  const std::uint64_t p0 = std::uint64_t(kPhiloxM0) * x[0];
  const std::uint64_t p1 = std::uint64_t(kPhiloxM1) * x[2];
  const auto hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
  const auto hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
  return {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
}

inline std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint64_t sample,
                                          std::uint32_t index, std::uint32_t stream) {
  return philox4x32({std::uint32_t(sample), std::uint32_t(sample >> 32), index, stream},
                    {std::uint32_t(seed), std::uint32_t(seed >> 32)});
}

// Uniform in (0,1) with 53-bit resolution; centred so 0 and 1 are unreachable
// and log() below is always finite.
inline double u01(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t u = (std::uint64_t(hi) << 32) | lo;
  return double((u >> 11) + 0.5) * 0x1p-53;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int r = 0; r < 9; ++r) {
    ctr = philox_round(ctr, key);
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return philox_round(ctr, key);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view role) {
  return splitmix64(seed ^ fnv1a64(role));
}

void sample_normals(std::uint64_t seed, std::uint64_t sample, int n, double* out) {
  for (int b = 0; 2 * b < n; ++b) {
    const auto r = block(seed, sample, std::uint32_t(b), kStreamNormal);
    const double u1 = u01(r[0], r[1]);
    const double u2 = u01(r[2], r[3]);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    out[2 * b] = rad * std::cos(kTwoPi * u2);
    if (2 * b + 1 < n) out[2 * b + 1] = rad * std::sin(kTwoPi * u2);
  }
}

void sample_signs(std::uint64_t seed, std::uint64_t sample, int n, double* out) {
  for (int b = 0; 128 * b < n; ++b) {
    const auto r = block(seed, sample, std::uint32_t(b), kStreamSign);
    const int upto = std::min(n - 128 * b, 128);
    for (int j = 0; j < upto; ++j) {
      const std::uint32_t word = r[std::size_t(j) / 32];
      out[128 * b + j] = (word >> (j % 32)) & 1u ? 1.0 : -1.0;
    }
  }
}

double Stream::uniform() {
  const auto r = block(seed_, ctr_++, 0, kStreamUniform);
  return u01(r[0], r[1]);
}

double Stream::normal() {
  const auto r = block(seed_, ctr_++, 0, kStreamNormal);
  const double u1 = u01(r[0], r[1]);
  const double u2 = u01(r[2], r[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::int64_t Stream::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto r = block(seed_, ctr_++, 0, kStreamUniform);
  const std::uint64_t u = (std::uint64_t(r[0]) << 32) | r[1];
  const auto span = std::uint64_t(hi - lo) + 1;
  return lo + std::int64_t(u % span);
}

}  // namespace gstab::rng
