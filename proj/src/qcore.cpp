#include "gchroma/qcore.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "gchroma/kernels.hpp"

namespace gchroma {

namespace {

void check_dims(std::span<const double> x, const QMatrix& Q) {
  if (x.size() != Q.size()) {
    throw std::invalid_argument("dimension mismatch: vector has " + std::to_string(x.size()) +
                                " entries, Q is " + std::to_string(Q.size()) + "x" +
                                std::to_string(Q.size()));
  }
}

void check_nonnegative(std::span<const double> x) {
  for (double v : x) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("weight vector must be finite and nonnegative");
  }
}

std::vector<int> positive_coords(std::span<const double> x) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

CornerWitness witness_from_mask(std::span<const double> x, const QMatrix& Q, std::span<const int> active,
                                std::uint64_t mask) {
  CornerWitness w;
  w.vector.assign(x.size(), 0.0);
  for (std::size_t b = 0; b < active.size(); ++b) {
    if ((mask >> b) & 1U) {
      w.support.push_back(active[b]);
      w.vector[static_cast<std::size_t>(active[b])] = x[static_cast<std::size_t>(active[b])];
    }
  }
  w.value = rayleigh_ratio(w.vector, Q);
  return w;
}

}  // namespace

QMatrix::QMatrix(std::size_t k, std::vector<double> entries) : k_(k), e_(std::move(entries)) {
  if (k_ == 0) throw std::invalid_argument("QMatrix: k must be positive");
  if (e_.size() != k_ * k_) throw std::invalid_argument("QMatrix: expected k*k entries");
  for (std::size_t i = 0; i < k_; ++i) {
    for (std::size_t j = 0; j < k_; ++j) {
      const double v = e_[i * k_ + j];
      if (!std::isfinite(v)) throw std::invalid_argument("QMatrix: entries must be finite");
      if (v < 0.0) throw std::invalid_argument("QMatrix: entries must be nonnegative");
      if (v != e_[j * k_ + i]) {
        throw std::invalid_argument("QMatrix: not symmetric at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      }
    }
  }
}

QMatrix QMatrix::from_rows(const std::vector<Vec>& rows) {
  const std::size_t k = rows.size();
  std::vector<double> e;
  e.reserve(k * k);
  for (const auto& r : rows) {
    if (r.size() != k) throw std::invalid_argument("QMatrix: rows must form a square matrix");
    e.insert(e.end(), r.begin(), r.end());
  }
  return QMatrix(k, std::move(e));
}

double QMatrix::q_star() const {
  double m = 0.0;
  for (std::size_t i = 0; i < k_; ++i) m = std::max(m, (*this)(i, i));
  return m;
}

double QMatrix::q_hat(std::span<const double> x) const {
  const double n = norm1(x);
  if (n == 0.0) return q_star();
  double s = 0.0;
  for (std::size_t i = 0; i < k_; ++i) s += x[i] * (*this)(i, i);
  return s / n;
}

double QMatrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < k_; ++i) s += (*this)(i, i);
  return s;
}

std::vector<Vec> QMatrix::rows() const {
  std::vector<Vec> out(k_);
  for (std::size_t i = 0; i < k_; ++i) out[i].assign(e_.begin() + i * k_, e_.begin() + (i + 1) * k_);
  return out;
}

QMatrix QMatrix::restricted(std::span<const int> idx) const {
  const std::size_t m = idx.size();
  std::vector<double> e(m * m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) e[a * m + b] = (*this)(idx[a], idx[b]);
  }
  return QMatrix(m, std::move(e));
}

double norm1(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

double rayleigh_ratio(std::span<const double> y, const QMatrix& Q) {
  check_dims(y, Q);
  check_nonnegative(y);
  const double n = norm1(y);
  if (n == 0.0) return 0.0;
  double num = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) continue;
    double r = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) r += Q(i, j) * y[j];
    num += y[i] * r;
  }
  return num / n;
}

double w_value(std::span<const double> x, const QMatrix& Q) {
  check_dims(x, Q);
  return kernels::corner_value(x, Q);
}

CornerWitness w_corner(std::span<const double> x, const QMatrix& Q) {
  check_dims(x, Q);
  check_nonnegative(x);
  const auto active = positive_coords(x);
  if (active.size() > 25) throw std::invalid_argument("w_corner: more than 25 positive coordinates");
  const auto scan = kernels::corner_max(x, Q, active);
  return witness_from_mask(x, Q, active, scan.mask);
}

CornerWitness minimal_corner(std::span<const double> x, const QMatrix& Q) { return w_corner(x, Q); }

std::vector<CornerWitness> maximizing_corners(std::span<const double> x, const QMatrix& Q) {
  check_dims(x, Q);
  check_nonnegative(x);
  const auto active = positive_coords(x);
  if (active.size() > 20) throw std::invalid_argument("maximizing_corners: too many positive coordinates");
  const std::uint64_t total = std::uint64_t{1} << active.size();
  std::vector<double> vals(total);
  double best = 0.0;
  Vec y(x.size());
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t b = 0; b < active.size(); ++b) {
      if ((mask >> b) & 1U) y[static_cast<std::size_t>(active[b])] = x[static_cast<std::size_t>(active[b])];
    }
    vals[mask] = rayleigh_ratio(y, Q);
    best = std::max(best, vals[mask]);
  }
  const double thr = best - kernels::kCornerTieTol * std::abs(best);
  std::vector<CornerWitness> out;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    if (vals[mask] >= thr) out.push_back(witness_from_mask(x, Q, active, mask));
  }
  return out;
}

double w_grid_oracle(std::span<const double> x, const QMatrix& Q, int resolution) {
  check_dims(x, Q);
  check_nonnegative(x);
  const std::size_t k = x.size();
  if (k > 4) throw std::invalid_argument("w_grid_oracle: k must be at most 4");
  if (resolution < 1) throw std::invalid_argument("w_grid_oracle: resolution must be positive");
  const std::size_t r1 = static_cast<std::size_t>(resolution) + 1;
  std::size_t total = 1;
  for (std::size_t i = 0; i < k; ++i) total *= r1;
  double best = 0.0;
  Vec y(k);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    double n = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      y[i] = static_cast<double>(c % r1) / resolution * x[i];
      n += y[i];
      c /= r1;
    }
    if (n == 0.0) continue;
    double num = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) num += y[i] * Q(i, j) * y[j];
    }
    best = std::max(best, num / n);
  }
  return best;
}

bool pseudodefinite_check(const QMatrix& Q, std::span<const int> support) {
  if (support.empty()) throw std::invalid_argument("pseudodefinite_check: empty support");
  const auto m = static_cast<Eigen::Index>(support.size());
  for (int s : support) {
    if (s < 0 || static_cast<std::size_t>(s) >= Q.size()) throw std::invalid_argument("pseudodefinite_check: index out of range");
  }
  if (m == 1) return true;
  Eigen::MatrixXd A(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) A(a, b) = Q(support[a], support[b]);
  }
  // Orthonormal basis of {y : sum y = 0}: the trailing m-1 columns of the
  // Householder Q of the all-ones vector.
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones);
  const Eigen::MatrixXd H = qr.householderQ();
  const Eigen::MatrixXd B = H.rightCols(m - 1);
  const Eigen::MatrixXd proj = B.transpose() * A * B;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(proj, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -1e-10;
}

bool balanced_optimality_check(std::span<const double> x, const QMatrix& Q) {
  const auto z = minimal_corner(x, Q);
  if (z.support.empty()) return true;
  return pseudodefinite_check(Q, z.support);
}

WStarBounds w_star_bounds(std::span<const double> x, const QMatrix& Q) {
  check_dims(x, Q);
  check_nonnegative(x);
  const double n = norm1(x);
  const double qh = Q.q_hat(x);
  WStarBounds b;
  b.upper = qh * n;
  if (Q.q_star() > 0.0) b.lower = qh * qh * n / Q.trace();
  return b;
}

}  // namespace gchroma
