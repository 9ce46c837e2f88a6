#include "gchroma/sampler.hpp"

#include <bit>
#include <ostream>
#include <stdexcept>

#include "gchroma/kernels.hpp"
#include "gchroma/rng.hpp"

namespace gchroma {

BitMatrix::BitMatrix(std::size_t n) : n_(n), wpr_((n + 63) / 64), bits_(n * ((n + 63) / 64), 0) {}

std::size_t BitMatrix::degree(std::size_t i) const {
  std::size_t d = 0;
  for (auto w : row(i)) d += static_cast<std::size_t>(std::popcount(w));
  return d;
}

std::size_t BitMatrix::edge_count() const {
  std::size_t s = 0;
  for (auto w : bits_) s += static_cast<std::size_t>(std::popcount(w));
  return s / 2;
}

int block_of(double x, std::span<const double> masses) {
  double c = 0.0;
  for (std::size_t j = 0; j + 1 < masses.size(); ++j) {
    c += masses[j];
    if (x < c) return static_cast<int>(j);
  }
  return static_cast<int>(masses.size()) - 1;
}

std::vector<std::size_t> block_counts(const SampledGraph& g, std::size_t k) {
  std::vector<std::size_t> c(k, 0);
  for (int b : g.blocks) {
    if (b < 0 || static_cast<std::size_t>(b) >= k) throw std::invalid_argument("block label out of range");
    ++c[static_cast<std::size_t>(b)];
  }
  return c;
}

SampledGraph sample_gnw(std::size_t n, const BlockGraphon& W, std::uint64_t seed) {
  W.validate();
  if (n == 0) throw std::invalid_argument("n must be at least 1");
  if (n > kMaxVertices) throw std::invalid_argument("n exceeds " + std::to_string(kMaxVertices));
  SampledGraph g;
  g.n = n;
  g.seed = seed;
  g.latents.resize(n);
  g.blocks.resize(n);
  auto eng = rng::make_engine(seed, rng::Stream::kLatents, 0);
  for (std::size_t i = 0; i < n; ++i) {
    g.latents[i] = rng::u01(eng);
    g.blocks[i] = block_of(g.latents[i], W.masses);
  }
  g.adjacency = BitMatrix(n);
  kernels::sample_edges(g.adjacency, g.blocks, W.P, seed);
  return g;
}

SampledGraph sample_sbm(const std::vector<std::size_t>& nvec, const std::vector<Vec>& P, std::uint64_t seed) {
  const std::size_t k = nvec.size();
  if (k == 0) throw std::invalid_argument("need at least one block");
  if (P.size() != k) throw std::invalid_argument("P must be k x k");
  for (std::size_t i = 0; i < k; ++i) {
    if (P[i].size() != k) throw std::invalid_argument("P must be k x k");
    for (std::size_t j = 0; j < k; ++j) {
      if (!(P[i][j] >= 0.0) || P[i][j] > 1.0) throw std::invalid_argument("edge probabilities must lie in [0,1]");
      if (P[i][j] != P[j][i]) throw std::invalid_argument("P is not symmetric");
    }
  }
  std::size_t n = 0;
  for (auto c : nvec) n += c;
  if (n > kMaxVertices) throw std::invalid_argument("n exceeds " + std::to_string(kMaxVertices));
  SampledGraph g;
  g.n = n;
  g.seed = seed;
  g.blocks.reserve(n);
  for (std::size_t b = 0; b < k; ++b) g.blocks.insert(g.blocks.end(), nvec[b], static_cast<int>(b));
  g.adjacency = BitMatrix(n);
  kernels::sample_edges(g.adjacency, g.blocks, P, seed);
  return g;
}

std::vector<std::vector<int>> decomposition_split(const SampledGraph& g, const Decomposition& d,
                                                  const BlockGraphon& W, std::uint64_t seed) {
  W.validate();
  d.validate(W.masses);
  const std::size_t k = W.size();
  const std::size_t T = d.parts.size();
  // Posterior over parts for each block: alpha_t mu_t(b) / lambda(b), renormalised.
  std::vector<Vec> cdf(k, Vec(T, 0.0));
  for (std::size_t b = 0; b < k; ++b) {
    double s = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      s += d.parts[t].alpha * d.parts[t].measure.weights[b] / W.masses[b];
      cdf[b][t] = s;
    }
    if (!(s > 0.0)) throw std::invalid_argument("decomposition gives block " + std::to_string(b) + " no mass");
    for (auto& v : cdf[b]) v /= s;
    cdf[b].back() = 1.0;
  }
  std::vector<std::vector<int>> parts(T);
  for (std::size_t v = 0; v < g.n; ++v) {
    const auto b = static_cast<std::size_t>(g.blocks[v]);
    if (b >= k) throw std::invalid_argument("vertex block label out of range");
    auto eng = rng::make_engine(seed, rng::Stream::kSplit, v);
    const double u = rng::u01(eng);
    std::size_t t = 0;
    while (t + 1 < T && !(u < cdf[b][t])) ++t;
    parts[t].push_back(static_cast<int>(v));
  }
  return parts;
}

void write_edge_list(std::ostream& os, const SampledGraph& g) {
  os << "n " << g.n << " seed " << g.seed << '\n';
  for (std::size_t i = 0; i < g.n; ++i) {
    const auto r = g.adjacency.row(i);
    for (std::size_t w = (i + 1) / 64; w < r.size(); ++w) {
      std::uint64_t bits = r[w];
      while (bits) {
        const auto j = w * 64 + static_cast<std::size_t>(std::countr_zero(bits));
        bits &= bits - 1;
        if (j > i) os << i << ' ' << j << '\n';
      }
    }
  }
}

}  // namespace gchroma
