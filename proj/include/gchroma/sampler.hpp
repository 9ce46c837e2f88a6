#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gchroma/graphon.hpp"

namespace gchroma {

/// Dense symmetric adjacency, one bit per ordered pair, rows padded to 64 bits.
class BitMatrix {
 public:
  BitMatrix() = default;
  explicit BitMatrix(std::size_t n);

  std::size_t size() const { return n_; }
  std::size_t words_per_row() const { return wpr_; }
  bool test(std::size_t i, std::size_t j) const {
    return (bits_[i * wpr_ + (j >> 6)] >> (j & 63)) & 1U;
  }
  void set(std::size_t i, std::size_t j) { bits_[i * wpr_ + (j >> 6)] |= std::uint64_t{1} << (j & 63); }
  /// Sets (i,j) and (j,i).
  void set_edge(std::size_t i, std::size_t j) {
    set(i, j);
    set(j, i);
  }
  std::span<std::uint64_t> row(std::size_t i) { return {bits_.data() + i * wpr_, wpr_}; }
  std::span<const std::uint64_t> row(std::size_t i) const { return {bits_.data() + i * wpr_, wpr_}; }
  std::size_t degree(std::size_t i) const;
  std::size_t edge_count() const;
  bool operator==(const BitMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t wpr_ = 0;
  std::vector<std::uint64_t> bits_;
};

inline constexpr std::size_t kMaxVertices = 50000;

struct SampledGraph {
  std::size_t n = 0;
  Vec latents;              // X_i; empty for SBM samples
  std::vector<int> blocks;  // block index of each vertex
  BitMatrix adjacency;
  std::uint64_t seed = 0;
};

/// Block index of a latent point under cumulative masses.
int block_of(double x, std::span<const double> masses);

/// Counts per block: the vector n(u, W).
std::vector<std::size_t> block_counts(const SampledGraph& g, std::size_t k);

/// Exchangeable random graph G(n, W).
SampledGraph sample_gnw(std::size_t n, const BlockGraphon& W, std::uint64_t seed);

/// Stochastic block model with fixed block sizes; P entries may equal 1.
SampledGraph sample_sbm(const std::vector<std::size_t>& nvec, const std::vector<Vec>& P,
                        std::uint64_t seed);

/// Random vertex-disjoint split into the parts of `d`: a vertex in block b
/// joins part t with probability alpha_t mu_t(b) / lambda(b).
std::vector<std::vector<int>> decomposition_split(const SampledGraph& g, const Decomposition& d,
                                                  const BlockGraphon& W, std::uint64_t seed);

/// "n <n> seed <seed>" then "i j" per edge (i < j), 0-indexed.
void write_edge_list(std::ostream& os, const SampledGraph& g);

}  // namespace gchroma
