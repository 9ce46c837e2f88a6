#include "gchroma/properties.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "gchroma/graphon.hpp"
#include "gchroma/qcore.hpp"
#include "gchroma/rng.hpp"

namespace gchroma {

namespace {

using Engine = std::mt19937_64;

struct Recorder {
  SuiteResult& r;
  int index;
  bool failed = false;

  // Records violation = max(0, lhs - rhs) of the check lhs <= rhs.
  void leq(double lhs, double rhs, const char* what) {
    const double v = lhs - rhs;
    if (!(v <= 0.0)) {
      r.worst = std::max(r.worst, std::isfinite(v) ? v : 1e300);
      if (!failed && r.first_failure.empty()) {
        std::ostringstream os;
        os.precision(12);
        os << "instance " << index << ": " << what << " (" << lhs << " > " << rhs << ")";
        r.first_failure = os.str();
      }
      failed = true;
    }
  }
  void truth(bool ok, const char* what) { leq(ok ? 0.0 : 1.0, 0.0, what); }
};

int uniform_int(Engine& e, int lo, int hi) { return lo + static_cast<int>(rng::below(e, static_cast<std::uint64_t>(hi - lo + 1))); }

double uniform(Engine& e, double lo, double hi) { return lo + (hi - lo) * rng::u01(e); }

std::vector<Vec> random_p(Engine& e, std::size_t k, double pmax) {
  std::vector<Vec> P(k, Vec(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) P[i][j] = P[j][i] = uniform(e, 0.0, pmax);
  }
  return P;
}

QMatrix q_from_p(const std::vector<Vec>& P) {
  const std::size_t k = P.size();
  std::vector<double> e(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) e[i * k + j] = -std::log1p(-P[i][j]);
  }
  return QMatrix(k, std::move(e));
}

QMatrix random_q(Engine& e, std::size_t k) { return q_from_p(random_p(e, k, 0.95)); }

// Nonnegative with occasional zeros, never all zero.
Vec random_x(Engine& e, std::size_t k) {
  Vec x(k);
  bool any = false;
  for (auto& v : x) {
    v = rng::u01(e) < 0.15 ? 0.0 : uniform(e, 0.01, 1.0);
    any = any || v > 0.0;
  }
  if (!any) x[rng::below(e, k)] = uniform(e, 0.01, 1.0);
  return x;
}

Vec dirichlet(Engine& e, std::size_t k) {
  Vec x(k);
  double s = 0.0;
  for (auto& v : x) {
    v = rng::exp1(e) + 1e-3;
    s += v;
  }
  for (auto& v : x) v /= s;
  return x;
}

BlockGraphon random_block(Engine& e, std::size_t k, double pmax) {
  BlockGraphon W;
  W.masses = dirichlet(e, k);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) s += W.masses[i];
  W.masses[k - 1] = 1.0 - s;
  W.P = random_p(e, k, pmax);
  return W;
}

double wstar_cost(std::span<const double> x, const QMatrix& Q, std::span<const VectorSystem> seeds = {}) {
  OptimizerConfig cfg;
  cfg.multistart = 16;
  return w_star(x, Q, cfg, seeds).total_cost;
}

double phistar_value(const BlockGraphon& W) {
  OptimizerConfig cfg;
  cfg.multistart = 16;
  return phi_star(W, cfg).value;
}

// -- suites -----------------------------------------------------------------

void suite_scaling(Engine& e, Recorder& rec) {
  const auto k = static_cast<std::size_t>(uniform_int(e, 1, 5));
  const QMatrix Q = random_q(e, k);
  const Vec x = random_x(e, k);
  const double s = 10.0 * (1.0 - rng::u01(e));
  Vec sx = x;
  for (auto& v : sx) v *= s;
  const double w = w_value(x, Q);
  rec.leq(std::abs(w_value(sx, Q) - s * w), 1e-9 * std::max(1.0, s * w), "w(sx) = s w(x)");
  const double ws = wstar_cost(x, Q);
  rec.leq(std::abs(wstar_cost(sx, Q) - s * ws), 1e-9 * std::max(1.0, s * ws), "w*(sx) = s w*(x)");
}

void suite_monotonicity(Engine& e, Recorder& rec) {
  const auto k = static_cast<std::size_t>(uniform_int(e, 1, 8));
  const QMatrix Q = random_q(e, k);
  const Vec x = random_x(e, k);
  Vec y = x;
  for (auto& v : y) v *= rng::u01(e) < 0.2 ? 0.0 : rng::u01(e);
  rec.leq(w_value(y, Q), w_value(x, Q) + 1e-12, "w(x') <= w(x) for x' <= x");
}

void suite_corner(Engine& e, Recorder& rec) {
  const auto k = static_cast<std::size_t>(uniform_int(e, 1, 4));
  const QMatrix Q = random_q(e, k);
  const Vec x = random_x(e, k);
  const double w = w_corner(x, Q).value;
  const double tol = 1e-12 * std::max(1.0, w);
  double prev_gap = std::numeric_limits<double>::infinity();
  for (int res : {1, 4, 16, 64}) {
    const double g = w_grid_oracle(x, Q, res);
    rec.leq(g, w + tol, "grid value <= corner value");
    rec.leq(w - g, prev_gap + tol, "grid gap shrinks on refinement");
    if (res == 1) rec.leq(std::abs(w - g), tol, "resolution 1 grid equals corner value");
    prev_gap = w - g;
  }
}

void suite_nesting(Engine& e, Recorder& rec) {
  // Small integer data makes ties between maximising corners common.
  const auto k = static_cast<std::size_t>(uniform_int(e, 2, 5));
  std::vector<double> q(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) q[i * k + j] = q[j * k + i] = static_cast<double>(rng::below(e, 4));
  }
  const QMatrix Q(k, q);
  Vec x(k);
  for (auto& v : x) v = static_cast<double>(1 + rng::below(e, 2));
  const auto corners = maximizing_corners(x, Q);
  const double w = w_value(x, Q);
  for (std::size_t a = 0; a < corners.size(); ++a) {
    for (std::size_t b = a + 1; b < corners.size(); ++b) {
      Vec z(k);
      bool empty = true;
      for (std::size_t i = 0; i < k; ++i) {
        z[i] = std::min(corners[a].vector[i], corners[b].vector[i]);
        empty = empty && z[i] == 0.0;
      }
      if (empty) continue;  // 0/0 = 0 is never a maximiser when w > 0
      rec.leq(w, rayleigh_ratio(z, Q) + 1e-11 * std::max(1.0, w), "meet of maximising corners maximises");
    }
  }
}

void suite_identity(Engine& e, Recorder& rec) {
  const auto k = static_cast<std::size_t>(uniform_int(e, 1, 6));
  const QMatrix Q = random_q(e, k);
  Vec z = random_x(e, k);
  Vec zp = random_x(e, k);
  const double nz = norm1(z);
  const double nzp = norm1(zp);
  Vec d(k);
  Vec sum(k);
  for (std::size_t i = 0; i < k; ++i) {
    d[i] = z[i] / nz - zp[i] / nzp;
    sum[i] = z[i] + zp[i];
  }
  double dqd = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) dqd += d[i] * Q(i, j) * d[j];
  }
  const double lhs = nz * nzp / (nz + nzp) * dqd;
  const double a = rayleigh_ratio(z, Q);
  const double b = rayleigh_ratio(zp, Q);
  const double rhs = a + b - rayleigh_ratio(sum, Q);
  rec.leq(std::abs(lhs - rhs), 1e-10 * std::max(1.0, a + b), "ratio defect identity");
}

void suite_triangle(Engine& e, Recorder& rec) {
  const auto k = static_cast<std::size_t>(uniform_int(e, 2, 4));
  const QMatrix Q = random_q(e, k);
  const Vec x = random_x(e, k);
  const Vec xp = random_x(e, k);
  OptimizerConfig cfg;
  cfg.multistart = 16;
  const auto sx = w_star(x, Q, cfg);
  const auto sxp = w_star(xp, Q, cfg);
  VectorSystem seed;
  seed.vectors = sx.vectors;
  seed.vectors.insert(seed.vectors.end(), sxp.vectors.begin(), sxp.vectors.end());
  Vec sum(k);
  for (std::size_t i = 0; i < k; ++i) sum[i] = x[i] + xp[i];
  seed.target = sum;
  const auto s = w_star(sum, Q, cfg, std::span<const VectorSystem>(&seed, 1));
  rec.leq(s.total_cost, sx.total_cost + sxp.total_cost + 1e-9, "w*(x+x') <= w*(x) + w*(x')");
}

QMatrix random_pseudodefinite(Engine& e, std::size_t k) {
  // B B' (nonnegative PSD) plus u 1' + 1 u', which vanishes on the zero-sum hyperplane.
  std::vector<Vec> B(k, Vec(k));
  for (auto& r : B) {
    for (auto& v : r) v = rng::u01(e) < 0.3 ? 0.0 : uniform(e, 0.0, 1.0);
  }
  Vec u(k);
  for (auto& v : u) v = uniform(e, 0.0, 1.0);
  std::vector<double> q(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double s = u[i] + u[j];
      for (std::size_t t = 0; t < k; ++t) s += B[i][t] * B[j][t];
      q[i * k + j] = s;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < i; ++j) q[i * k + j] = q[j * k + i];
  }
  return QMatrix(k, q);
}

void suite_pseudodefinite(Engine& e, Recorder& rec) {
  const auto k = static_cast<std::size_t>(uniform_int(e, 2, 5));
  const QMatrix Q = random_pseudodefinite(e, k);
  std::vector<int> all(k);
  for (std::size_t i = 0; i < k; ++i) all[i] = static_cast<int>(i);
  rec.truth(pseudodefinite_check(Q, all), "constructed Q is pseudodefinite");
  const Vec x = random_x(e, k);
  rec.truth(balanced_optimality_check(x, Q), "balanced optimality holds");
  const double w = w_value(x, Q);
  rec.leq(std::abs(wstar_cost(x, Q) - w), 1e-8 * std::max(1.0, w), "w* = w for pseudodefinite Q");
}

void suite_sandwich(Engine& e, Recorder& rec) {
  const auto k = static_cast<std::size_t>(uniform_int(e, 1, 4));
  const BlockGraphon W = random_block(e, k, 0.95);
  const double lo = -std::log1p(-W.min_p());
  const double hi = -std::log1p(-W.max_p());
  const double tol = 1e-9 * std::max(1.0, hi);
  const double ps = phistar_value(W);
  const double p = phi(W);
  rec.leq(lo, ps + tol, "log 1/(1-min p) <= phi*");
  rec.leq(ps, p + tol, "phi* <= phi");
  rec.leq(p, hi + tol, "phi <= log 1/(1-max p)");
  const BlockMeasure mu{dirichlet(e, k)};
  const double pm = phi_mu(mu, W);
  rec.leq(lo, pm + tol, "log 1/(1-min p) <= phi(mu)");
  rec.leq(pm, hi + tol, "phi(mu) <= log 1/(1-max p)");
}

void suite_stability(Engine& e, Recorder& rec) {
  const auto k = static_cast<std::size_t>(uniform_int(e, 1, 4));
  const BlockGraphon W = random_block(e, k, 0.9);
  BlockGraphon Wp = W;
  const double scale = uniform(e, 0.0, 0.2);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const double v = std::clamp(W.P[i][j] + uniform(e, -scale, scale), 0.0, 0.9);
      Wp.P[i][j] = Wp.P[j][i] = v;
    }
  }
  // S_delta: a random set of blocks; delta is the largest change outside it.
  std::vector<bool> in_s(k);
  for (std::size_t i = 0; i < k; ++i) in_s[i] = rng::u01(e) < 0.3;
  double delta = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (!in_s[i] && !in_s[j]) delta = std::max(delta, std::abs(W.P[i][j] - Wp.P[i][j]));
    }
  }
  const double eps = 1.0 - std::max(W.max_p(), Wp.max_p());
  auto mass_and_l2 = [&](const Vec& mu) {
    double mass = 0.0;
    double l2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (in_s[i]) mass += mu[i];
      for (std::size_t j = 0; j < k; ++j) {
        const double d = W.P[i][j] - Wp.P[i][j];
        l2 += mu[i] * mu[j] * d * d;
      }
    }
    return std::pair{mass, std::sqrt(l2)};
  };
  for (const Vec& mu : {W.masses, dirichlet(e, k)}) {
    const auto [mass, l2] = mass_and_l2(mu);
    const auto b = stability_bound(eps, delta, mass, l2, k);
    const BlockMeasure m{mu};
    rec.leq(std::abs(phi_mu(m, W) - phi_mu(m, Wp)), b.bound_a + 1e-12, "|phi(mu,W) - phi(mu,W')| <= bound (a)");
  }
  const auto [mass, l2] = mass_and_l2(W.masses);
  const auto b = stability_bound(eps, delta, mass, l2, k);
  const double diff = std::abs(phistar_value(W) - phistar_value(Wp));
  rec.leq(diff, b.bound_b + 1e-4, "|phi_k(W) - phi_k(W')| <= bound (b)");
  rec.leq(diff, b.bound_c + 1e-4, "|phi_k(W) - phi_k(W')| <= bound (c)");
}

void suite_perturbation(Engine& e, Recorder& rec) {
  const auto k = static_cast<std::size_t>(uniform_int(e, 1, 4));
  const BlockGraphon W = random_block(e, k, 0.9);
  const double ep = uniform(e, 0.01, 0.5);
  BlockGraphon Wp = W;
  for (auto& r : Wp.P) {
    for (auto& p : r) p = (1.0 - ep) * p + ep;
  }
  const double c = -std::log1p(-ep);
  const QMatrix Q = q_of(W);
  const QMatrix Qp = q_of(Wp);
  const Vec mu = dirichlet(e, k);
  // Every fixed set gains exactly c times its mass.
  Vec z = mu;
  for (auto& v : z) v = rng::u01(e) < 0.5 ? 0.0 : v;
  rec.leq(std::abs(rayleigh_ratio(z, Qp) - rayleigh_ratio(z, Q) - c * norm1(z)), 1e-10 * std::max(1.0, c),
          "per-set shift is c |z|");
  const double tol = 1e-10 * std::max(1.0, c);
  const double a = w_value(mu, Q);
  const double ap = w_value(mu, Qp);
  rec.leq(c, ap + tol, "log 1/(1-eps') <= phi(mu,W')");
  rec.leq(ap, a + c + tol, "phi(mu,W') <= phi(mu,W) + log 1/(1-eps')");
  rec.leq(a, ap + tol, "phi(mu,W) <= phi(mu,W')");
}

struct Suite {
  const char* name;
  void (*run)(Engine&, Recorder&);
};

const std::vector<Suite>& suites() {
  static const std::vector<Suite> s = {
      {"scaling", suite_scaling},
      {"monotonicity", suite_monotonicity},
      {"corner_attainment", suite_corner},
      {"nesting", suite_nesting},
      {"identity", suite_identity},
      {"triangle", suite_triangle},
      {"pseudodefinite_equality", suite_pseudodefinite},
      {"sandwich", suite_sandwich},
      {"stability", suite_stability},
      {"perturbation", suite_perturbation},
  };
  return s;
}

}  // namespace

const std::vector<std::string>& property_suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& s : suites()) n.emplace_back(s.name);
    return n;
  }();
  return names;
}

std::vector<SuiteResult> run_property_suites(std::uint64_t seed, int trials, const std::vector<std::string>& only) {
  if (trials < 0) throw std::invalid_argument("trials must be nonnegative");
  for (const auto& name : only) {
    const auto& n = property_suite_names();
    if (std::find(n.begin(), n.end(), name) == n.end()) throw std::invalid_argument("unknown property suite '" + name + "'");
  }
  std::vector<SuiteResult> out;
  if (trials == 0) return out;
  for (std::size_t si = 0; si < suites().size(); ++si) {
    const auto& s = suites()[si];
    if (!only.empty() && std::find(only.begin(), only.end(), s.name) == only.end()) continue;
    SuiteResult r;
    r.name = s.name;
    for (int i = 0; i < trials; ++i) {
      auto eng = rng::make_engine(rng::derive_seed(seed, rng::Stream::kInstances, si), rng::Stream::kInstances,
                                  static_cast<std::uint64_t>(i));
      Recorder rec{r, i};
      try {
        s.run(eng, rec);
      } catch (const std::exception& ex) {
        if (r.first_failure.empty()) r.first_failure = "instance " + std::to_string(i) + ": " + ex.what();
        rec.failed = true;
      }
      ++r.instances;
      if (rec.failed) ++r.failures;
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace gchroma
