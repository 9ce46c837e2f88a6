#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gchroma/graphon.hpp"
#include "gchroma/sampler.hpp"

namespace gchroma {

struct Colouring {
  std::vector<int> assignment;
  int num_colours = 0;
};

struct ColouringOptions {
  int restarts = 20;        // randomized extractions per colour class
  int slack = 1;            // allowed deviation from the block quota, per block
  std::uint64_t seed = 1;
};

bool verify_colouring(const SampledGraph& g, const Colouring& c);

/// Saturation-degree greedy; ties by degree, then index.
Colouring dsatur(const SampledGraph& g);

/// Colour classes whose block composition tracks the block masses of W.
Colouring balanced_colour(const SampledGraph& g, const BlockGraphon& W, const ColouringOptions& opt = {});

/// Balanced colouring of the vertex subset `vertices`, composition tracking
/// `weights`, target size 2 log n / phi(weights, W). Colours start at 0.
Colouring balanced_colour_subset(const SampledGraph& g, std::span<const int> vertices, const Vec& weights,
                                 const BlockGraphon& W, const ColouringOptions& opt);

/// Split by `d`, balanced-colour each part against its measure, disjoint palettes.
Colouring strategy_colour(const SampledGraph& g, const Decomposition& d, const BlockGraphon& W,
                          std::uint64_t seed, const ColouringOptions& opt = {});

struct IndependenceEstimate {
  std::size_t alpha_hat = 0;   // largest independent set found
  std::size_t bound = 0;       // ceil(n / alpha_hat)
};
/// Heuristic: ceil(n / alpha_hat) is a true lower bound on chi only if
/// alpha_hat >= alpha(G). For trend reporting.
IndependenceEstimate independence_lower_bound(const SampledGraph& g, int restarts, std::uint64_t seed = 1);

/// "vertex colour" lines.
void write_colouring(std::ostream& os, const Colouring& c);

}  // namespace gchroma
