#pragma once

#include <cstdint>
#include <random>

namespace confound {

using Rng = std::mt19937_64;

// splitmix64 step; used to derive independent child seeds (per context, per
// node) from one master seed without correlated streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 1));
}

// Uniform in [0,1) from the top 53 bits. Written out explicitly (instead of
// std::uniform_real_distribution) so seeded draw sequences are reproducible
// across standard libraries and replayable by tests.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, bound). Rejection-free double path is fine here:
// bounds are tiny (node counts), bias is unmeasurable at 2^-53.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  return static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(bound));
}

inline double uniform_in(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

}  // namespace confound
