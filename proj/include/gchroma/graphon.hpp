#pragma once

// Block graphons, measures on their blocks, and the chromatic coefficients
//
//   phi(W)      balanced strategy            = w(u^W)
//   phi(mu, W)  balanced w.r.t. measure mu   = w((mu(S_i))_i)
//   phi*(W)     best finite-type strategy    = w*(u^W)
//
// where u^W is the vector of block masses. chi(G(n,W)) ~ phi*(W) n / (2 log n).

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gchroma/qcore.hpp"

namespace gchroma {

/// W = sum_ij p_ij 1{S_i x S_j}, blocks given by their masses.
struct BlockGraphon {
  Vec masses;
  std::vector<Vec> P;

  std::size_t size() const { return masses.size(); }
  /// Throws std::invalid_argument on any invariant violation.
  void validate() const;
  double min_p() const;
  double max_p() const;

  static BlockGraphon constant(double p);
  /// Three equal blocks; the worked example where neither balanced nor greedy is optimal.
  static BlockGraphon figure_block();
  /// 3/4 on [0,1/2]^2, 1/2 elsewhere.
  static BlockGraphon w_right();
};

/// Probability vector over the blocks of a BlockGraphon.
struct BlockMeasure {
  Vec weights;
  /// Nonnegative, sums to 1 within `tol`.
  void validate(double tol = 1e-12) const;
};

struct DecompositionPart {
  double alpha = 0.0;
  BlockMeasure measure;
};

/// Convex combination of block measures equal to the uniform measure.
struct Decomposition {
  std::vector<DecompositionPart> parts;

  /// Checks sum alpha = 1 and sum alpha*mu = masses (1e-9 per coordinate).
  void validate(const Vec& masses) const;
  static Decomposition trivial(const Vec& masses);
};

/// Graphons that are not given as blocks: constants, named builtins, grids.
struct GeneralGraphon {
  struct Constant {
    double p;
  };
  enum class Builtin { kFigureBlock, kLeft, kRight };
  struct Grid {
    std::vector<Vec> values;  // m x m, piecewise constant on the uniform m-grid
  };
  std::variant<Constant, Builtin, Grid> kind;

  static GeneralGraphon constant(double p) { return {Constant{p}}; }
  static GeneralGraphon builtin(Builtin b) { return {b}; }
  static GeneralGraphon grid(std::vector<Vec> values) { return {Grid{std::move(values)}}; }
  /// "figure-block", "W_L", "W_R", "constant:<p>".
  static GeneralGraphon from_name(const std::string& name);

  void validate() const;
  double value(double x, double y) const;
  /// Essential infimum / supremum over [a,b) x [c,d).
  std::pair<double, double> cell_extrema(double a, double b, double c, double d) const;
  /// Exact block form when one exists (everything except W_L).
  std::optional<BlockGraphon> as_block() const;
  /// Grid resolution for grids, 0 otherwise (no limit).
  std::size_t grid_size() const;
};

QMatrix q_of(const BlockGraphon& W);

double phi(const BlockGraphon& W);
/// phi plus the maximising block support.
CornerWitness phi_witness(const BlockGraphon& W);
double phi_mu(const BlockMeasure& mu, const BlockGraphon& W);
double strategy_cost(const Decomposition& d, const BlockGraphon& W);

struct PhiStar {
  double value = 0.0;
  Decomposition witness;
  VectorSystem system;
};
PhiStar phi_star(const BlockGraphon& W, const OptimizerConfig& cfg = {});

/// Decomposition from a system summing to the block masses.
Decomposition decomposition_from_system(const VectorSystem& sys);

/// Intervals of decreasing lengths, p0 inside blocks and p <= p0 across.
double closed_form_block1(const Vec& lengths, double p, double p0);
BlockGraphon block1_graphon(const Vec& lengths, double p, double p0);
/// k equal intervals, p_i inside block i (decreasing) and p <= p_k across.
double closed_form_block2(const Vec& p_vec, double p);
BlockGraphon block2_graphon(const Vec& p_vec, double p);

/// k equal blocks carrying the essential sup (resp. inf) of W over each cell.
BlockGraphon block_upper(const GeneralGraphon& W, std::size_t k);
BlockGraphon block_lower(const GeneralGraphon& W, std::size_t k);

struct StripStrategy {
  BlockGraphon refinement;  // block_upper(W_L, 2k+1)
  Decomposition decomposition;
  double cost = 0.0;
};
/// Paired-strip strategy for W_L with k pairs plus one leftover strip.
StripStrategy strip_decomposition_WL(std::size_t k);

struct StabilityBounds {
  double bound_a = 0.0;
  double bound_b = 0.0;  // NaN when k is not given
  double bound_c = 0.0;
};
StabilityBounds stability_bound(double eps, double delta, double mass_sdelta, double l2_dist,
                                std::optional<std::size_t> k = std::nullopt);

/// phi*(W) n / (2 log n), natural log.
double chi_prediction(const BlockGraphon& W, std::size_t n, const OptimizerConfig& cfg = {});
double chi_prediction_from_coefficient(double coefficient, double n);

/// The two hand-derived strategies for figure_block().
Decomposition figure_greedy_decomposition();
Decomposition figure_optimal_decomposition();

}  // namespace gchroma
