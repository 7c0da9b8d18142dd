#pragma once

#include <cstdint>

namespace capcover {

// Selects between the OpenMP kernel and its serial reference. Both paths
// produce identical results; the serial one is kept for testing.
enum class Exec { serial, parallel };

// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads();

// SplitMix64 step; used to derive per-batch seeds from a user seed so that
// batched sampling is reproducible regardless of thread count.
constexpr std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace capcover
