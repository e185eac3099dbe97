#pragma once

#include <cstdint>
#include <random>

namespace skqd {

// All randomness in the library flows through std::mt19937_64 (a named,
// portable generator with published reference outputs) seeded through the
// helpers below, so runs reproduce bit-exactly across platforms.

// splitmix64: the standard 64-bit mixing finalizer. Used both to expand a
// master seed into independent stream seeds and to generate deterministic
// solver start vectors.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Documented seed-splitting rule: stream i of master seed s is
// splitmix64 applied i+1 times to s. Sampling at Trotter step k uses
// stream k; independent batches use disjoint stream indices.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master;
  std::uint64_t out = splitmix64(s);
  for (std::uint64_t i = 0; i < stream; ++i) out = splitmix64(s);
  return out;
}

// Uniform double in [0, 1) with exactly 53 random bits. Hand-rolled instead
// of std::uniform_real_distribution, whose output is implementation-defined.
inline double canonical_double(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace skqd
