#include <omp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "gchroma/kernels.hpp"
#include "gchroma/rng.hpp"
#include "gchroma/sampler.hpp"

namespace gchroma::kernels {

namespace {

constexpr std::size_t kMaxActive = 32;

// Exact ratio of one mask, used where the running sums have cancelled.
double mask_ratio(std::size_t m, const double* xa, const double* xq, std::uint64_t mask) {
  double norm = 0.0;
  double num = 0.0;
  for (std::size_t b = 0; b < m; ++b) {
    if (!((mask >> b) & 1U)) continue;
    norm += xa[b];
    for (std::size_t j = 0; j < m; ++j) {
      if ((mask >> j) & 1U) num += xq[b * m + j] * xa[j];
    }
  }
  return norm > 0.0 ? num / norm : 0.0;
}

// Gray-code walk over masks [first, last) of the compact problem
// (xa, xq) where xq[b*m + j] = x_b * q_bj. Calls visit(mask, value).
// Masks whose running norm is small next to |x| are re-evaluated exactly:
// removing a large coordinate leaves cancellation noise that would swamp them.
template <class Visit>
void gray_walk(std::size_t m, const double* xa, const double* xq, std::uint64_t first, std::uint64_t last,
               Visit&& visit) {
  double total = 0.0;
  for (std::size_t b = 0; b < m; ++b) total += xa[b];
  const double small = 1e-4 * total;
  std::array<double, kMaxActive> s{};  // s_j = sum_{b in S} x_b q_bj
  std::uint64_t mask = first ^ (first >> 1);
  double norm = 0.0;
  for (std::size_t b = 0; b < m; ++b) {
    if (!((mask >> b) & 1U)) continue;
    norm += xa[b];
    for (std::size_t j = 0; j < m; ++j) s[j] += xq[b * m + j];
  }
  double num = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    if ((mask >> j) & 1U) num += xa[j] * s[j];
  }
  visit(mask, norm > 0.0 ? num / norm : 0.0);
  for (std::uint64_t g = first + 1; g < last; ++g) {
    const auto b = static_cast<std::size_t>(std::countr_zero(g));
    const double* row = xq + b * m;
    const double xb = xa[b];
    if ((mask >> b) & 1U) {
      for (std::size_t j = 0; j < m; ++j) s[j] -= row[j];
      num -= 2.0 * xb * s[b] + xb * row[b];
      norm -= xb;
    } else {
      num += 2.0 * xb * s[b] + xb * row[b];
      for (std::size_t j = 0; j < m; ++j) s[j] += row[j];
      norm += xb;
    }
    mask ^= std::uint64_t{1} << b;
    visit(mask, norm > small ? num / norm : mask_ratio(m, xa, xq, mask));
  }
}

struct Compact {
  std::size_t m = 0;
  std::array<double, kMaxActive> xa{};
  std::vector<double> xq;
};

Compact compact(std::span<const double> x, const QMatrix& Q, std::span<const int> active) {
  Compact c;
  c.m = active.size();
  c.xq.resize(c.m * c.m);
  for (std::size_t a = 0; a < c.m; ++a) {
    const auto i = static_cast<std::size_t>(active[a]);
    c.xa[a] = x[i];
    for (std::size_t b = 0; b < c.m; ++b) c.xq[a * c.m + b] = x[i] * Q(i, static_cast<std::size_t>(active[b]));
  }
  return c;
}

}  // namespace

CornerScan corner_max(std::span<const double> x, const QMatrix& Q, std::span<const int> active) {
  if (active.size() > kMaxActive) throw std::invalid_argument("corner_max: too many active coordinates");
  const Compact c = compact(x, Q, active);
  const std::uint64_t total = std::uint64_t{1} << c.m;
  // Fixed chunking keeps the result independent of the thread count.
  const std::uint64_t nchunks = c.m >= 14 ? 64 : 1;
  const std::uint64_t len = total / nchunks;
  const auto nc = static_cast<std::int64_t>(nchunks);

  std::vector<double> chunk_max(nchunks, 0.0);
#pragma omp parallel for schedule(static) if (nchunks > 1)
  for (std::int64_t ch = 0; ch < nc; ++ch) {
    double best = 0.0;
    const auto first = static_cast<std::uint64_t>(ch) * len;
    gray_walk(c.m, c.xa.data(), c.xq.data(), first, first + len, [&](std::uint64_t, double v) { best = std::max(best, v); });
    chunk_max[static_cast<std::size_t>(ch)] = best;
  }
  const double best = *std::max_element(chunk_max.begin(), chunk_max.end());
  const double thr = best - kCornerTieTol * std::abs(best);

  std::vector<CornerScan> chunk_pick(nchunks);
  std::vector<char> chunk_found(nchunks, 0);
#pragma omp parallel for schedule(static) if (nchunks > 1)
  for (std::int64_t ch = 0; ch < nc; ++ch) {
    const auto idx = static_cast<std::size_t>(ch);
    const auto first = static_cast<std::uint64_t>(ch) * len;
    gray_walk(c.m, c.xa.data(), c.xq.data(), first, first + len, [&](std::uint64_t mask, double v) {
      if (v < thr) return;
      if (!chunk_found[idx] || corner_precedes(mask, chunk_pick[idx].mask, x, active)) {
        chunk_pick[idx] = {mask, v};
        chunk_found[idx] = 1;
      }
    });
  }
  CornerScan out{0, 0.0};
  bool found = false;
  for (std::size_t ch = 0; ch < nchunks; ++ch) {
    if (!chunk_found[ch]) continue;
    if (!found || corner_precedes(chunk_pick[ch].mask, out.mask, x, active)) {
      out = chunk_pick[ch];
      found = true;
    }
  }
  return out;
}

double corner_value(std::span<const double> x, const QMatrix& Q) {
  const std::size_t k = x.size();
  std::array<int, kMaxActive> active{};
  std::size_t m = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (x[i] > 0.0) {
      if (m == kMaxActive) throw std::invalid_argument("corner_value: too many active coordinates");
      active[m++] = static_cast<int>(i);
    }
  }
  if (m == 0) return 0.0;
  std::array<double, kMaxActive> xa{};
  std::array<double, kMaxActive * kMaxActive> xq;
  for (std::size_t a = 0; a < m; ++a) {
    const auto i = static_cast<std::size_t>(active[a]);
    xa[a] = x[i];
    const auto qrow = Q.row(i);
    for (std::size_t b = 0; b < m; ++b) xq[a * m + b] = x[i] * qrow[static_cast<std::size_t>(active[b])];
  }
  double best = 0.0;
  gray_walk(m, xa.data(), xq.data(), 0, std::uint64_t{1} << m, [&](std::uint64_t, double v) { best = std::max(best, v); });
  return best;
}

void sample_edges(BitMatrix& adj, std::span<const int> blocks, const std::vector<Vec>& P, std::uint64_t seed) {
  const auto n = static_cast<std::int64_t>(adj.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    auto eng = rng::make_engine(seed, rng::Stream::kEdges, i);
    const auto& prow = P[static_cast<std::size_t>(blocks[i])];
    for (std::size_t j = i + 1; j < adj.size(); ++j) {
      if (rng::u01(eng) < prow[static_cast<std::size_t>(blocks[j])]) adj.set(i, j);
    }
  }
  // Lower triangle: row j reads column j of the rows above it and writes only itself.
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t jj = 0; jj < n; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    for (std::size_t i = 0; i < j; ++i) {
      if (adj.test(i, j)) adj.set(j, i);
    }
  }
}

std::vector<double> lattice_values(const std::vector<Vec>& points, const QMatrix& Q) {
  std::vector<double> out(points.size());
  const auto np = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < np; ++p) {
    out[static_cast<std::size_t>(p)] = corner_value(points[static_cast<std::size_t>(p)], Q);
  }
  return out;
}

}  // namespace gchroma::kernels
