#include "gchroma/colouring.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "gchroma/rng.hpp"

namespace gchroma {

namespace {

template <class F>
void for_each_neighbour(const BitMatrix& adj, std::size_t v, F&& f) {
  const auto r = adj.row(v);
  for (std::size_t w = 0; w < r.size(); ++w) {
    std::uint64_t bits = r[w];
    while (bits) {
      f(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
      bits &= bits - 1;
    }
  }
}

// One randomized greedy extraction with proportional block quotas, then trimmed
// so that every block stays within `slack` of its share.
std::vector<int> extract_class(const SampledGraph& g, const std::vector<int>& remaining, const Vec& w,
                               std::size_t cap, int slack, std::mt19937_64& eng) {
  const auto& adj = g.adjacency;
  std::vector<int> order = remaining;
  rng::shuffle(order.begin(), order.end(), eng);
  std::vector<std::uint64_t> forbidden(adj.words_per_row(), 0);
  std::vector<int> counts(w.size(), 0);
  std::vector<int> members;
  const double sl = static_cast<double>(slack);
  for (int v : order) {
    const auto uv = static_cast<std::size_t>(v);
    if ((forbidden[uv >> 6] >> (uv & 63)) & 1U) continue;
    const auto b = static_cast<std::size_t>(g.blocks[uv]);
    if (counts[b] + 1 > w[b] * static_cast<double>(members.size() + 1) + sl) continue;
    members.push_back(v);
    ++counts[b];
    const auto r = adj.row(uv);
    for (std::size_t i = 0; i < r.size(); ++i) forbidden[i] |= r[i];
    if (members.size() >= cap) break;
  }
  while (true) {
    const double size = static_cast<double>(members.size());
    bool short_block = false;
    for (std::size_t b = 0; b < w.size(); ++b) {
      if (counts[b] < w[b] * size - sl) short_block = true;
    }
    if (!short_block) break;
    std::size_t over = 0;
    double most = -1e300;
    for (std::size_t b = 0; b < w.size(); ++b) {
      const double e = counts[b] - w[b] * size;
      if (counts[b] > 0 && e > most) {
        most = e;
        over = b;
      }
    }
    for (auto it = members.rbegin(); it != members.rend(); ++it) {
      if (static_cast<std::size_t>(g.blocks[static_cast<std::size_t>(*it)]) == over) {
        members.erase(std::next(it).base());
        break;
      }
    }
    --counts[over];
  }
  return members;
}

std::size_t class_cap(std::size_t n, double phi_value) {
  if (!(phi_value > 0.0)) return std::max<std::size_t>(1, n);
  const double t = 2.0 * std::log(std::max<double>(2.0, static_cast<double>(n))) / phi_value;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t)));
}

}  // namespace

bool verify_colouring(const SampledGraph& g, const Colouring& c) {
  if (c.assignment.size() != g.n) return false;
  std::vector<char> used;
  for (int col : c.assignment) {
    if (col < 0) return false;
    if (static_cast<std::size_t>(col) >= used.size()) used.resize(static_cast<std::size_t>(col) + 1, 0);
    used[static_cast<std::size_t>(col)] = 1;
  }
  if (std::count(used.begin(), used.end(), 1) != c.num_colours) return false;
  for (std::size_t i = 0; i < g.n; ++i) {
    bool ok = true;
    for_each_neighbour(g.adjacency, i, [&](std::size_t j) {
      if (j != i && c.assignment[i] == c.assignment[j]) ok = false;
      if (j == i) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

Colouring dsatur(const SampledGraph& g) {
  const std::size_t n = g.n;
  Colouring c;
  c.assignment.assign(n, -1);
  if (n == 0) return c;
  std::vector<std::size_t> degree(n);
  for (std::size_t v = 0; v < n; ++v) degree[v] = g.adjacency.degree(v);
  std::vector<std::vector<std::uint64_t>> seen(n);  // colours present among neighbours
  std::vector<std::size_t> sat(n, 0);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (c.assignment[v] >= 0) continue;
      if (best == n || sat[v] > sat[best] || (sat[v] == sat[best] && degree[v] > degree[best])) best = v;
    }
    const auto& s = seen[best];
    std::size_t col = 0;
    while (col / 64 < s.size() && ((s[col / 64] >> (col % 64)) & 1U)) ++col;
    c.assignment[best] = static_cast<int>(col);
    c.num_colours = std::max(c.num_colours, static_cast<int>(col) + 1);
    for_each_neighbour(g.adjacency, best, [&](std::size_t u) {
      if (c.assignment[u] >= 0) return;
      auto& su = seen[u];
      if (su.size() <= col / 64) su.resize(col / 64 + 1, 0);
      const std::uint64_t bit = std::uint64_t{1} << (col % 64);
      if (!(su[col / 64] & bit)) {
        su[col / 64] |= bit;
        ++sat[u];
      }
    });
  }
  return c;
}

Colouring balanced_colour_subset(const SampledGraph& g, std::span<const int> vertices, const Vec& weights,
                                 const BlockGraphon& W, const ColouringOptions& opt) {
  const std::size_t k = W.size();
  if (weights.size() != k) throw std::invalid_argument("weights and graphon block counts differ");
  if (g.blocks.size() != g.n) throw std::invalid_argument("graph carries no block labels");
  if (opt.restarts < 1) throw std::invalid_argument("restarts must be positive");
  if (opt.slack < 0) throw std::invalid_argument("slack must be nonnegative");
  const QMatrix Q = q_of(W);
  Colouring out;
  out.assignment.assign(vertices.size(), -1);
  if (vertices.empty()) return out;

  std::vector<int> position(g.n, -1);
  std::vector<int> remaining(vertices.begin(), vertices.end());
  std::vector<std::size_t> rem(k, 0);
  for (std::size_t idx = 0; idx < vertices.size(); ++idx) {
    const auto v = static_cast<std::size_t>(vertices[idx]);
    if (v >= g.n || position[v] >= 0) throw std::invalid_argument("vertex list must hold distinct graph vertices");
    position[v] = static_cast<int>(idx);
    const auto b = static_cast<std::size_t>(g.blocks[v]);
    if (b >= k) throw std::invalid_argument("vertex block label out of range");
    ++rem[b];
  }
  const std::size_t N = vertices.size();
  const Vec base = weights;
  const std::size_t base_cap = class_cap(N, w_value(base, Q));

  for (int colour = 0; !remaining.empty(); ++colour) {
    // Follow the target measure while the remaining vertices can still supply it;
    // afterwards follow the composition of what is left.
    Vec w = base;
    std::size_t cap = base_cap;
    bool feasible = true;
    for (std::size_t b = 0; b < k; ++b) {
      const double need = std::round(static_cast<double>(cap) * base[b]);
      if (static_cast<double>(rem[b]) < need || (base[b] == 0.0 && rem[b] > 0)) feasible = false;
    }
    if (!feasible) {
      for (std::size_t b = 0; b < k; ++b) w[b] = static_cast<double>(rem[b]) / static_cast<double>(remaining.size());
      cap = class_cap(N, w_value(w, Q));
    }

    const auto restarts = static_cast<std::size_t>(opt.restarts);
    std::vector<std::vector<int>> picks(restarts);
    const std::uint64_t class_seed = rng::derive_seed(opt.seed, rng::Stream::kColour, static_cast<std::uint64_t>(colour));
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(restarts); ++r) {
      auto eng = rng::make_engine(class_seed, rng::Stream::kColour, static_cast<std::uint64_t>(r));
      picks[static_cast<std::size_t>(r)] = extract_class(g, remaining, w, cap, opt.slack, eng);
    }
    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r) {
      if (picks[r].size() > picks[best].size()) best = r;
    }
    for (int v : picks[best]) {
      out.assignment[static_cast<std::size_t>(position[static_cast<std::size_t>(v)])] = colour;
      --rem[static_cast<std::size_t>(g.blocks[static_cast<std::size_t>(v)])];
    }
    std::erase_if(remaining, [&](int v) { return out.assignment[static_cast<std::size_t>(position[static_cast<std::size_t>(v)])] >= 0; });
    out.num_colours = colour + 1;
  }
  return out;
}

Colouring balanced_colour(const SampledGraph& g, const BlockGraphon& W, const ColouringOptions& opt) {
  W.validate();
  std::vector<int> all(g.n);
  for (std::size_t i = 0; i < g.n; ++i) all[i] = static_cast<int>(i);
  return balanced_colour_subset(g, all, W.masses, W, opt);
}

Colouring strategy_colour(const SampledGraph& g, const Decomposition& d, const BlockGraphon& W, std::uint64_t seed,
                          const ColouringOptions& opt) {
  const auto parts = decomposition_split(g, d, W, seed);
  Colouring out;
  out.assignment.assign(g.n, -1);
  for (std::size_t t = 0; t < parts.size(); ++t) {
    if (parts[t].empty()) continue;
    ColouringOptions sub = opt;
    sub.seed = rng::derive_seed(opt.seed, rng::Stream::kColour, 0x10000 + t);
    const auto c = balanced_colour_subset(g, parts[t], d.parts[t].measure.weights, W, sub);
    for (std::size_t i = 0; i < parts[t].size(); ++i) {
      out.assignment[static_cast<std::size_t>(parts[t][i])] = out.num_colours + c.assignment[i];
    }
    out.num_colours += c.num_colours;
  }
  return out;
}

IndependenceEstimate independence_lower_bound(const SampledGraph& g, int restarts, std::uint64_t seed) {
  if (restarts < 1) throw std::invalid_argument("restarts must be positive");
  IndependenceEstimate est;
  if (g.n == 0) return est;
  std::vector<std::size_t> sizes(static_cast<std::size_t>(restarts), 0);
#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < restarts; ++r) {
    auto eng = rng::make_engine(seed, rng::Stream::kInstances, static_cast<std::uint64_t>(r));
    std::vector<int> order(g.n);
    for (std::size_t i = 0; i < g.n; ++i) order[i] = static_cast<int>(i);
    rng::shuffle(order.begin(), order.end(), eng);
    std::vector<std::uint64_t> forbidden(g.adjacency.words_per_row(), 0);
    std::size_t size = 0;
    for (int v : order) {
      const auto uv = static_cast<std::size_t>(v);
      if ((forbidden[uv >> 6] >> (uv & 63)) & 1U) continue;
      ++size;
      const auto row = g.adjacency.row(uv);
      for (std::size_t i = 0; i < row.size(); ++i) forbidden[i] |= row[i];
    }
    sizes[static_cast<std::size_t>(r)] = size;
  }
  est.alpha_hat = *std::max_element(sizes.begin(), sizes.end());
  est.bound = (g.n + est.alpha_hat - 1) / est.alpha_hat;
  return est;
}

void write_colouring(std::ostream& os, const Colouring& c) {
  for (std::size_t v = 0; v < c.assignment.size(); ++v) os << v << ' ' << c.assignment[v] << '\n';
}

}  // namespace gchroma
