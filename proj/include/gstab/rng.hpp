#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace gstab::rng {

// Counter-based randomness (Philox4x32-10). Every draw is a pure function of
// (seed, sample index, draw index), so Monte Carlo loops can be batched or
// partitioned any way at all and still reproduce the exact same stream.
// Stateful generators cannot offer that invariance, which is why this is not
// std::mt19937.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

// Derives an independent seed for a named substream of a run-level seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view role);

// n standard normals for one Monte Carlo sample. Box-Muller over 53-bit
// uniforms; out[i] depends only on (seed, sample, i).
void sample_normals(std::uint64_t seed, std::uint64_t sample, int n, double* out);

// n Rademacher signs (+1/-1) with the same keying, stream-separated from the
// normals.
void sample_signs(std::uint64_t seed, std::uint64_t sample, int n, double* out);

// Stateful convenience wrapper over the same engine, for instance generation
// and randomized searches (never on the measurement path, where the keyed
// free functions above are required).
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : seed_(seed) {}

  double uniform();  // (0,1)
  double normal();
  // Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

 private:
  std::uint64_t seed_;
  std::uint64_t ctr_ = 0;
};

}  // namespace gstab::rng
