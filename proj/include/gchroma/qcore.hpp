#pragma once

// Optimisation over the log-odds matrix Q of a block graphon.
//
//   w(x)  = max_{0 <= y <= x} y'Qy / |y|         (balanced colouring cost)
//   w*(x) = inf sum_t w(x_t) over systems sum_t x_t = x   (multi-type cost)
//
// All norms are 1-norms. The zero vector has ratio 0 by convention.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gchroma {

using Vec = std::vector<double>;

/// Thrown when the w* optimiser returns a value outside its provable bracket.
/// This indicates a bug, never a convergence warning.
class OptimizerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symmetric, nonnegative, finite k x k matrix (row-major storage).
class QMatrix {
 public:
  QMatrix() = default;
  /// Validates symmetry, nonnegativity and finiteness; throws std::invalid_argument.
  QMatrix(std::size_t k, std::vector<double> entries);
  static QMatrix from_rows(const std::vector<Vec>& rows);

  std::size_t size() const { return k_; }
  double operator()(std::size_t i, std::size_t j) const { return e_[i * k_ + j]; }
  std::span<const double> row(std::size_t i) const { return {e_.data() + i * k_, k_}; }
  const std::vector<double>& entries() const { return e_; }

  /// max_i q_ii
  double q_star() const;
  /// Diagonal average weighted by x; q_star() when x is zero.
  double q_hat(std::span<const double> x) const;
  double trace() const;
  std::vector<Vec> rows() const;

  /// Principal submatrix on the given (sorted) indices.
  QMatrix restricted(std::span<const int> idx) const;

 private:
  std::size_t k_ = 0;
  std::vector<double> e_;
};

struct CornerWitness {
  std::vector<int> support;  // sorted, 0-based
  Vec vector;                // z_i = x_i on support, else 0
  double value = 0.0;
};

struct VectorSystem {
  std::vector<Vec> vectors;
  Vec target;
  double total_cost = 0.0;
};

struct OptimizerConfig {
  int multistart = 64;
  int max_iterations = 20000;        // per Nelder-Mead run
  int stall_iterations = 200;        // stop when no 1e-10 improvement over this many iterations
  double stall_tolerance = 1e-10;
  std::uint64_t seed = 0x5eed'cafe'f00dULL;
  int max_vectors = 0;               // 0: one vector per active coordinate
  bool lattice_seed = true;          // global convex-envelope seed on a simplex lattice
  std::size_t lattice_budget = 60000;  // max lattice points
};

double norm1(std::span<const double> x);

/// y'Qy / |y|, and 0 for y = 0.
double rayleigh_ratio(std::span<const double> y, const QMatrix& Q);

/// w(x) value only; fast path used inside the optimiser.
double w_value(std::span<const double> x, const QMatrix& Q);

/// Maximising corner of the box [0, x]; ties go to the smallest norm, then the
/// lexicographically smallest support. Requires at most 25 positive coordinates.
CornerWitness w_corner(std::span<const double> x, const QMatrix& Q);

/// Same as w_corner: the tie-break already selects the minimal-norm maximiser.
CornerWitness minimal_corner(std::span<const double> x, const QMatrix& Q);

/// Every corner attaining w(x) (up to relative tolerance 1e-11), supports over
/// positive coordinates only. For small k; used by the nesting property.
std::vector<CornerWitness> maximizing_corners(std::span<const double> x, const QMatrix& Q);

/// Brute-force grid maximum of the ratio over y_i = (j/res) x_i. k <= 4.
double w_grid_oracle(std::span<const double> x, const QMatrix& Q, int resolution);

/// Is Q restricted to `support` nonnegative on the zero-sum hyperplane?
bool pseudodefinite_check(const QMatrix& Q, std::span<const int> support);

/// True iff w(x) = w*(x), i.e. the balanced strategy is optimal.
bool balanced_optimality_check(std::span<const double> x, const QMatrix& Q);

struct WStarBounds {
  double lower = 0.0;
  double upper = 0.0;
};
WStarBounds w_star_bounds(std::span<const double> x, const QMatrix& Q);

/// Minimal-cost system summing to x. `seeds` are extra candidate systems
/// (any size); the result never costs more than the best seed.
VectorSystem w_star(std::span<const double> x, const QMatrix& Q, const OptimizerConfig& cfg = {},
                    std::span<const VectorSystem> seeds = {});

/// Sum of w over the vectors, recomputed.
double system_cost(const std::vector<Vec>& vectors, const QMatrix& Q);

/// Carathéodory reduction: at most `max_vectors` vectors, same sum, cost not increased.
std::vector<Vec> reduce_system(std::vector<Vec> vectors, const QMatrix& Q, std::size_t max_vectors);

/// Snap dust coordinates, merge same-support vectors where that does not raise
/// the cost, reduce, and drop zero vectors.
VectorSystem canonicalize(const VectorSystem& sys, const QMatrix& Q, std::size_t max_vectors);

/// Lattice convex-envelope LP for w*(x): exact over directions on the simplex
/// lattice of the given resolution. Returned system sums to x.
VectorSystem lattice_envelope(std::span<const double> x, const QMatrix& Q, int resolution);

}  // namespace gchroma
