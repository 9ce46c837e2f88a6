#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gchroma/kernels.hpp"
#include "gchroma/rng.hpp"
#include "gchroma/sampler.hpp"

namespace gchroma::kernels {

bool corner_precedes(std::uint64_t a, std::uint64_t b, std::span<const double> x, std::span<const int> active) {
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    const double xi = x[static_cast<std::size_t>(active[i])];
    if ((a >> i) & 1U) na += xi;
    if ((b >> i) & 1U) nb += xi;
  }
  const double tol = 1e-12 * (na + nb);
  if (na < nb - tol) return true;
  if (nb < na - tol) return false;
  // Lexicographic on the sorted index sequences; active is ascending, so walk bits upward.
  std::size_t ia = 0;
  std::size_t ib = 0;
  const std::size_t m = active.size();
  while (true) {
    while (ia < m && !((a >> ia) & 1U)) ++ia;
    while (ib < m && !((b >> ib) & 1U)) ++ib;
    if (ia == m || ib == m) return ia == m && ib != m;
    if (ia != ib) return ia < ib;
    ++ia;
    ++ib;
  }
}

namespace serial {

namespace {
double mask_ratio(std::uint64_t mask, std::span<const double> x, const QMatrix& Q, std::span<const int> active) {
  double num = 0.0;
  double n = 0.0;
  for (std::size_t a = 0; a < active.size(); ++a) {
    if (!((mask >> a) & 1U)) continue;
    const auto i = static_cast<std::size_t>(active[a]);
    n += x[i];
    for (std::size_t b = 0; b < active.size(); ++b) {
      if (!((mask >> b) & 1U)) continue;
      const auto j = static_cast<std::size_t>(active[b]);
      num += x[i] * Q(i, j) * x[j];
    }
  }
  return n == 0.0 ? 0.0 : num / n;
}
}  // namespace

CornerScan corner_max(std::span<const double> x, const QMatrix& Q, std::span<const int> active) {
  const std::uint64_t total = std::uint64_t{1} << active.size();
  double best = 0.0;
  for (std::uint64_t mask = 1; mask < total; ++mask) best = std::max(best, mask_ratio(mask, x, Q, active));
  const double thr = best - kCornerTieTol * std::abs(best);
  CornerScan out{0, 0.0};
  bool found = false;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    const double v = mask_ratio(mask, x, Q, active);
    if (v < thr) continue;
    if (!found || corner_precedes(mask, out.mask, x, active)) {
      out = {mask, v};
      found = true;
    }
  }
  return out;
}

void sample_edges(BitMatrix& adj, std::span<const int> blocks, const std::vector<Vec>& P, std::uint64_t seed) {
  const std::size_t n = adj.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto eng = rng::make_engine(seed, rng::Stream::kEdges, i);
    const auto& prow = P[static_cast<std::size_t>(blocks[i])];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng::u01(eng) < prow[static_cast<std::size_t>(blocks[j])]) adj.set_edge(i, j);
    }
  }
}

std::vector<double> lattice_values(const std::vector<Vec>& points, const QMatrix& Q) {
  std::vector<double> out(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<int> active;
    for (std::size_t i = 0; i < points[p].size(); ++i) {
      if (points[p][i] > 0.0) active.push_back(static_cast<int>(i));
    }
    out[p] = corner_max(points[p], Q, active).value;
  }
  return out;
}

}  // namespace serial
}  // namespace gchroma::kernels
