#include "gchroma/graphon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gchroma {

namespace {

void check_probability_matrix(const std::vector<Vec>& P, std::size_t k, bool allow_one) {
  if (P.size() != k) throw std::invalid_argument("P must be " + std::to_string(k) + "x" + std::to_string(k));
  for (std::size_t i = 0; i < k; ++i) {
    if (P[i].size() != k) throw std::invalid_argument("P must be square");
    for (std::size_t j = 0; j < k; ++j) {
      const double p = P[i][j];
      if (!std::isfinite(p) || p < 0.0 || (allow_one ? p > 1.0 : p >= 1.0)) {
        throw std::invalid_argument("P[" + std::to_string(i) + "][" + std::to_string(j) + "] out of range");
      }
      if (p != P[j][i]) throw std::invalid_argument("P is not symmetric");
    }
  }
}

// Indices of the intervals of a partition (given by cumulative ends) that meet [a,b) in positive length.
// Overlaps below 1e-9 of the cell width are rounding artefacts of the cumulative sums.
std::vector<std::size_t> overlapping(const Vec& ends, double a, double b) {
  std::vector<std::size_t> out;
  double lo = 0.0;
  const double tol = 1e-9 * (b - a);
  for (std::size_t i = 0; i < ends.size(); ++i) {
    const double hi = ends[i];
    if (std::min(hi, b) - std::max(lo, a) > tol) out.push_back(i);
    lo = hi;
  }
  return out;
}

Vec cumulative(const Vec& masses) {
  Vec c(masses.size());
  std::partial_sum(masses.begin(), masses.end(), c.begin());
  c.back() = 1.0;
  return c;
}

std::pair<double, double> block_cell_extrema(const Vec& ends, const std::vector<Vec>& P, double a, double b, double c,
                                             double d) {
  const auto I = overlapping(ends, a, b);
  const auto J = overlapping(ends, c, d);
  if (I.empty() || J.empty()) throw std::invalid_argument("cell_extrema: empty cell");
  double lo = 1.0;
  double hi = 0.0;
  for (auto i : I) {
    for (auto j : J) {
      lo = std::min(lo, P[i][j]);
      hi = std::max(hi, P[i][j]);
    }
  }
  return {lo, hi};
}

BlockGraphon block_approx(const GeneralGraphon& W, std::size_t k, bool upper) {
  if (k == 0) throw std::invalid_argument("block approximation needs k >= 1");
  W.validate();
  const std::size_t g = W.grid_size();
  if (g != 0 && g < k) {
    throw std::invalid_argument("grid of size " + std::to_string(g) + " is coarser than k = " + std::to_string(k));
  }
  BlockGraphon out;
  out.masses.assign(k, 1.0 / static_cast<double>(k));
  out.P.assign(k, Vec(k, 0.0));
  const double kk = static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const auto [lo, hi] = W.cell_extrema(i / kk, (i + 1) / kk, j / kk, (j + 1) / kk);
      out.P[i][j] = out.P[j][i] = upper ? hi : lo;
    }
  }
  return out;
}

}  // namespace

void BlockGraphon::validate() const {
  const std::size_t k = masses.size();
  if (k == 0) throw std::invalid_argument("graphon needs at least one block");
  double s = 0.0;
  for (double m : masses) {
    if (!std::isfinite(m) || m <= 0.0) throw std::invalid_argument("block masses must be positive");
    s += m;
  }
  if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("block masses must sum to 1");
  check_probability_matrix(P, k, false);
}

double BlockGraphon::min_p() const {
  double m = 1.0;
  for (const auto& r : P) m = std::min(m, *std::min_element(r.begin(), r.end()));
  return m;
}

double BlockGraphon::max_p() const {
  double m = 0.0;
  for (const auto& r : P) m = std::max(m, *std::max_element(r.begin(), r.end()));
  return m;
}

BlockGraphon BlockGraphon::constant(double p) { return {{1.0}, {{p}}}; }

BlockGraphon BlockGraphon::figure_block() {
  const double t = 1.0 / 3.0;
  return {{t, t, t}, {{0.5, 0.5, 0.75}, {0.5, 0.75, 0.5}, {0.75, 0.5, 0.875}}};
}

BlockGraphon BlockGraphon::w_right() { return {{0.5, 0.5}, {{0.75, 0.5}, {0.5, 0.5}}}; }

void BlockMeasure::validate(double tol) const {
  if (weights.empty()) throw std::invalid_argument("measure needs at least one block");
  double s = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("measure weights must be nonnegative");
    s += w;
  }
  if (std::abs(s - 1.0) > tol) throw std::invalid_argument("measure weights must sum to 1");
}

void Decomposition::validate(const Vec& masses) const {
  if (parts.empty()) throw std::invalid_argument("decomposition has no parts");
  Vec acc(masses.size(), 0.0);
  double total = 0.0;
  for (const auto& part : parts) {
    if (!(part.alpha > 0.0) || part.alpha > 1.0 + 1e-9) throw std::invalid_argument("alpha must lie in (0,1]");
    if (part.measure.weights.size() != masses.size()) throw std::invalid_argument("decomposition block count mismatch");
    part.measure.validate(1e-9);
    total += part.alpha;
    for (std::size_t i = 0; i < masses.size(); ++i) acc[i] += part.alpha * part.measure.weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("alphas must sum to 1");
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (std::abs(acc[i] - masses[i]) > 1e-9) {
      throw std::invalid_argument("decomposition does not average to the block masses at block " + std::to_string(i));
    }
  }
}

Decomposition Decomposition::trivial(const Vec& masses) { return {{{1.0, {masses}}}}; }

GeneralGraphon GeneralGraphon::from_name(const std::string& name) {
  if (name == "figure-block") return builtin(Builtin::kFigureBlock);
  if (name == "W_L") return builtin(Builtin::kLeft);
  if (name == "W_R") return builtin(Builtin::kRight);
  const std::string prefix = "constant:";
  if (name.rfind(prefix, 0) == 0) {
    const std::string rest = name.substr(prefix.size());
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != rest.size()) throw std::invalid_argument("bad constant graphon '" + name + "'");
    GeneralGraphon g = constant(p);
    g.validate();
    return g;
  }
  throw std::invalid_argument("unknown builtin graphon '" + name + "'");
}

void GeneralGraphon::validate() const {
  if (const auto* c = std::get_if<Constant>(&kind)) {
    if (!std::isfinite(c->p) || c->p < 0.0 || c->p >= 1.0) throw std::invalid_argument("constant must lie in [0,1)");
  } else if (const auto* g = std::get_if<Grid>(&kind)) {
    check_probability_matrix(g->values, g->values.size(), false);
    if (g->values.empty()) throw std::invalid_argument("grid is empty");
  }
}

double GeneralGraphon::value(double x, double y) const {
  if (const auto* c = std::get_if<Constant>(&kind)) return c->p;
  if (const auto* g = std::get_if<Grid>(&kind)) {
    const std::size_t m = g->values.size();
    const auto cell = [m](double t) {
      return std::min(m - 1, static_cast<std::size_t>(std::max(0.0, t) * static_cast<double>(m)));
    };
    return g->values[cell(x)][cell(y)];
  }
  switch (std::get<Builtin>(kind)) {
    case Builtin::kLeft:
      return x + y <= 1.0 ? 0.75 : 0.5;
    case Builtin::kRight:
      return (x < 0.5 && y < 0.5) ? 0.75 : 0.5;
    case Builtin::kFigureBlock: {
      const auto W = BlockGraphon::figure_block();
      return W.P[static_cast<std::size_t>(std::min(2.0, std::floor(x * 3.0)))]
                [static_cast<std::size_t>(std::min(2.0, std::floor(y * 3.0)))];
    }
  }
  return 0.0;
}

std::pair<double, double> GeneralGraphon::cell_extrema(double a, double b, double c, double d) const {
  if (!(a < b) || !(c < d)) throw std::invalid_argument("cell_extrema: empty cell");
  if (const auto* k = std::get_if<Builtin>(&kind); k && *k == Builtin::kLeft) {
    // 3/4 on x+y <= 1; each side has positive area in the cell iff the cell crosses it.
    const double hi = (a + c < 1.0) ? 0.75 : 0.5;
    const double lo = (b + d > 1.0) ? 0.5 : 0.75;
    return {lo, hi};
  }
  const auto W = *as_block();
  return block_cell_extrema(cumulative(W.masses), W.P, a, b, c, d);
}

std::optional<BlockGraphon> GeneralGraphon::as_block() const {
  if (const auto* c = std::get_if<Constant>(&kind)) return BlockGraphon::constant(c->p);
  if (const auto* g = std::get_if<Grid>(&kind)) {
    const std::size_t m = g->values.size();
    return BlockGraphon{Vec(m, 1.0 / static_cast<double>(m)), g->values};
  }
  switch (std::get<Builtin>(kind)) {
    case Builtin::kFigureBlock:
      return BlockGraphon::figure_block();
    case Builtin::kRight:
      return BlockGraphon::w_right();
    case Builtin::kLeft:
      return std::nullopt;
  }
  return std::nullopt;
}

std::size_t GeneralGraphon::grid_size() const {
  if (const auto* g = std::get_if<Grid>(&kind)) return g->values.size();
  return 0;
}

QMatrix q_of(const BlockGraphon& W) {
  const std::size_t k = W.size();
  if (W.P.size() != k) throw std::invalid_argument("P must be k x k");
  std::vector<double> e(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    if (W.P[i].size() != k) throw std::invalid_argument("P must be k x k");
    for (std::size_t j = 0; j < k; ++j) {
      const double p = W.P[i][j];
      if (!(p >= 0.0) || !(p < 1.0)) throw std::invalid_argument("edge probabilities must lie in [0,1)");
      e[i * k + j] = -std::log1p(-p);
    }
  }
  return QMatrix(k, std::move(e));
}

double phi(const BlockGraphon& W) { return phi_witness(W).value; }

CornerWitness phi_witness(const BlockGraphon& W) {
  W.validate();
  return w_corner(W.masses, q_of(W));
}

double phi_mu(const BlockMeasure& mu, const BlockGraphon& W) {
  if (mu.weights.size() != W.size()) throw std::invalid_argument("measure and graphon block counts differ");
  mu.validate(1e-9);
  return w_value(mu.weights, q_of(W));
}

double strategy_cost(const Decomposition& d, const BlockGraphon& W) {
  W.validate();
  d.validate(W.masses);
  const QMatrix Q = q_of(W);
  double c = 0.0;
  for (const auto& part : d.parts) c += part.alpha * w_value(part.measure.weights, Q);
  return c;
}

Decomposition decomposition_from_system(const VectorSystem& sys) {
  double total = 0.0;
  for (const auto& v : sys.vectors) total += norm1(v);
  Decomposition d;
  for (const auto& v : sys.vectors) {
    const double n = norm1(v);
    if (n <= 0.0) continue;
    DecompositionPart part;
    part.alpha = n / total;
    part.measure.weights.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) part.measure.weights[i] = v[i] / n;
    d.parts.push_back(std::move(part));
  }
  return d;
}

PhiStar phi_star(const BlockGraphon& W, const OptimizerConfig& cfg) {
  W.validate();
  PhiStar out;
  out.system = w_star(W.masses, q_of(W), cfg);
  out.value = out.system.total_cost;
  out.witness = decomposition_from_system(out.system);
  return out;
}

namespace {
void check_descending(const Vec& v, const char* what) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1]) throw std::invalid_argument(std::string(what) + " must be sorted in descending order");
  }
}
}  // namespace

BlockGraphon block1_graphon(const Vec& lengths, double p, double p0) {
  if (lengths.empty()) throw std::invalid_argument("lengths must be nonempty");
  if (!(p > 0.0) || !(p <= p0) || !(p0 < 1.0)) throw std::invalid_argument("need 0 < p <= p0 < 1");
  check_descending(lengths, "lengths");
  const std::size_t k = lengths.size();
  BlockGraphon W;
  W.masses = lengths;
  W.P.assign(k, Vec(k, p));
  for (std::size_t i = 0; i < k; ++i) W.P[i][i] = p0;
  W.validate();
  return W;
}

double closed_form_block1(const Vec& lengths, double p, double p0) {
  block1_graphon(lengths, p, p0);
  const double a = std::log((1.0 - p) / (1.0 - p0));
  const double b = -std::log1p(-p);
  double sq = 0.0;
  double s = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (double l : lengths) {
    sq += l * l;
    s += l;
    best = std::max(best, sq / s * a + s * b);
  }
  return best;
}

BlockGraphon block2_graphon(const Vec& p_vec, double p) {
  if (p_vec.empty()) throw std::invalid_argument("p_vec must be nonempty");
  check_descending(p_vec, "p_vec");
  for (double v : p_vec) {
    if (!(v > 0.0) || !(v < 1.0)) throw std::invalid_argument("p_vec entries must lie in (0,1)");
  }
  if (!(p >= 0.0) || p > p_vec.back()) throw std::invalid_argument("need 0 <= p <= p_k");
  const std::size_t k = p_vec.size();
  BlockGraphon W;
  W.masses.assign(k, 1.0 / static_cast<double>(k));
  W.P.assign(k, Vec(k, p));
  for (std::size_t i = 0; i < k; ++i) W.P[i][i] = p_vec[i];
  W.validate();
  return W;
}

double closed_form_block2(const Vec& p_vec, double p) {
  block2_graphon(p_vec, p);
  const double k = static_cast<double>(p_vec.size());
  const double b = -std::log1p(-p);
  double s = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i <= p_vec.size(); ++i) {
    s += -std::log1p(-p_vec[i - 1]);
    const double di = static_cast<double>(i);
    best = std::max(best, (di - 1.0) / k * b + s / (di * k));
  }
  return best;
}

BlockGraphon block_upper(const GeneralGraphon& W, std::size_t k) { return block_approx(W, k, true); }
BlockGraphon block_lower(const GeneralGraphon& W, std::size_t k) { return block_approx(W, k, false); }

StripStrategy strip_decomposition_WL(std::size_t k) {
  if (k == 0) throw std::invalid_argument("strip decomposition needs k >= 1");
  const std::size_t K = 2 * k + 1;
  StripStrategy s;
  s.refinement = block_upper(GeneralGraphon::builtin(GeneralGraphon::Builtin::kLeft), K);
  const double a = 1.0 / static_cast<double>(K);
  // Strip pairs {i, 2k+1-i} see W_R's pattern; strip 0 is left over.
  for (std::size_t i = 1; i <= k; ++i) {
    Vec w(K, 0.0);
    w[i] = 0.5;
    w[K - i] = 0.5;
    s.decomposition.parts.push_back({2.0 * a, {w}});
  }
  Vec last(K, 0.0);
  last[0] = 1.0;
  s.decomposition.parts.push_back({a, {last}});
  s.cost = strategy_cost(s.decomposition, s.refinement);
  return s;
}

StabilityBounds stability_bound(double eps, double delta, double mass_sdelta, double l2_dist,
                                std::optional<std::size_t> k) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
  if (!(delta >= 0.0) || !(mass_sdelta >= 0.0) || !(l2_dist >= 0.0)) {
    throw std::invalid_argument("delta, mass and l2 distance must be nonnegative");
  }
  StabilityBounds b;
  b.bound_c = (delta + 2.0 * mass_sdelta) / eps;
  b.bound_a = std::min(delta + 2.0 * mass_sdelta, l2_dist) / eps;
  b.bound_b = k ? std::sqrt(static_cast<double>(*k)) * l2_dist / eps : std::numeric_limits<double>::quiet_NaN();
  return b;
}

double chi_prediction_from_coefficient(double coefficient, double n) {
  if (!(n > 1.0)) throw std::invalid_argument("n must exceed 1");
  return coefficient * n / (2.0 * std::log(n));
}

double chi_prediction(const BlockGraphon& W, std::size_t n, const OptimizerConfig& cfg) {
  if (n < 3) throw std::invalid_argument("n must be at least 3");
  return chi_prediction_from_coefficient(phi_star(W, cfg).value, static_cast<double>(n));
}

Decomposition figure_greedy_decomposition() {
  return {{{1.0 / 3.0, {{1.0, 0.0, 0.0}}}, {0.5, {{0.0, 2.0 / 3.0, 1.0 / 3.0}}}, {1.0 / 6.0, {{0.0, 0.0, 1.0}}}}};
}

Decomposition figure_optimal_decomposition() {
  const double s3 = std::sqrt(3.0);
  return {{{(s3 - 1.0) / 2.0, {{(1.0 + s3) / 3.0, (2.0 - s3) / 3.0, 0.0}}},
           {(3.0 - s3) / 2.0, {{0.0, (6.0 - s3) / 9.0, (3.0 + s3) / 9.0}}}}};
}

}  // namespace gchroma
