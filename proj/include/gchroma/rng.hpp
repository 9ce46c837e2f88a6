#pragma once

// Stream derivation for reproducible sampling.
//
// Every random draw comes from a std::mt19937_64 seeded with
//   derive_seed(master, stream, index)
// where `stream` names the purpose (latents, edges, split, ...) and `index`
// names the unit of work (row, vertex, restart). Units never share a
// generator, so results do not depend on scheduling or thread count.

#include <cmath>
#include <cstdint>
#include <random>

namespace gchroma::rng {

enum class Stream : std::uint64_t {
  kLatents = 1,
  kEdges = 2,
  kSplit = 3,
  kColour = 4,
  kOptimizer = 5,
  kInstances = 6,
};

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  return splitmix64(h ^ index);
}

inline std::mt19937_64 make_engine(std::uint64_t master, Stream stream, std::uint64_t index) {
  return std::mt19937_64(derive_seed(master, stream, index));
}

/// Uniform on [0,1) from the top 53 bits; identical across standard libraries.
inline double u01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n) by rejection; portable, unlike std::uniform_int_distribution.
inline std::uint64_t below(std::mt19937_64& g, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t r;
  do {
    r = g();
  } while (r >= limit);
  return r % n;
}

/// Exponential(1) variate, used for Dirichlet draws.
inline double exp1(std::mt19937_64& g) { return -std::log1p(-u01(g)); }

template <class RandomIt>
void shuffle(RandomIt first, RandomIt last, std::mt19937_64& g) {
  const auto n = last - first;
  for (auto i = n - 1; i > 0; --i) {
    const auto j = static_cast<decltype(i)>(below(g, static_cast<std::uint64_t>(i) + 1));
    std::swap(first[i], first[j]);
  }
}

}  // namespace gchroma::rng
