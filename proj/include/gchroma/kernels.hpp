#pragma once

// Data-parallel kernels. Every kernel has a plain serial reference in
// `kernels::serial` that the tests compare against and the benchmark times.
// Parallel results never depend on the thread count: work is split into a
// fixed number of chunks and each chunk draws from its own derived stream.

#include <cstdint>
#include <span>
#include <vector>

#include "gchroma/qcore.hpp"

namespace gchroma {
class BitMatrix;
}

namespace gchroma::kernels {

struct CornerScan {
  std::uint64_t mask = 0;  // bit b <=> active[b] in the support
  double value = 0.0;
};

/// Relative tolerance under which two corner values count as tied.
inline constexpr double kCornerTieTol = 1e-11;

namespace serial {

/// Reference: evaluates every subset of `active` from scratch, O(k^2 2^k).
CornerScan corner_max(std::span<const double> x, const QMatrix& Q, std::span<const int> active);

/// Reference edge sampler: row by row, same per-row streams as the parallel one.
void sample_edges(BitMatrix& adj, std::span<const int> blocks, const std::vector<Vec>& P,
                  std::uint64_t seed);

/// Reference lattice evaluation of w at every point.
std::vector<double> lattice_values(const std::vector<Vec>& points, const QMatrix& Q);

}  // namespace serial

/// Gray-code enumeration in a fixed number of chunks, OpenMP over chunks.
CornerScan corner_max(std::span<const double> x, const QMatrix& Q, std::span<const int> active);

/// Value only, single Gray-code pass, no allocation. At most 32 active coordinates.
double corner_value(std::span<const double> x, const QMatrix& Q);

/// Upper triangle in parallel over rows, then mirrored in parallel.
void sample_edges(BitMatrix& adj, std::span<const int> blocks, const std::vector<Vec>& P,
                  std::uint64_t seed);

std::vector<double> lattice_values(const std::vector<Vec>& points, const QMatrix& Q);

/// Tie-break order: smaller norm first, then lexicographically smaller support.
bool corner_precedes(std::uint64_t a, std::uint64_t b, std::span<const double> x,
                     std::span<const int> active);

}  // namespace gchroma::kernels
