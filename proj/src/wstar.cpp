// w*(x) = inf over systems summing to x of sum_t w(x_t).
//
// w is positively 1-homogeneous, so w*(x) = |x| * conv(g)(x/|x|) with g = w on
// the probability simplex and conv the convex envelope. Three routes feed the
// search:
//   1. a lattice LP over simplex directions (global on the lattice, m <= 6),
//      refined by column generation off the lattice,
//   2. multistart Nelder-Mead over per-coordinate softmax shares,
//   3. pairwise coordinate transfers refined by golden-section search.
// The best system is canonicalised and checked against the provable bracket
// (q_hat^2 |x| / tr Q) <= w*(x) <= min(q_hat |x|, w(x)).

#include <omp.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "gchroma/kernels.hpp"
#include "gchroma/qcore.hpp"
#include "gchroma/rng.hpp"

namespace gchroma {

namespace {

constexpr double kLogitFloor = -40.0;

double vec_norm(const Vec& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Puts any rounding residual of sum_t v_t - x into the vector holding the
// largest share of that coordinate.
void repair_sum(std::vector<Vec>& vs, std::span<const double> x) {
  if (vs.empty()) return;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = 0.0;
    std::size_t arg = 0;
    for (std::size_t t = 0; t < vs.size(); ++t) {
      s += vs[t][i];
      if (vs[t][i] > vs[arg][i]) arg = t;
    }
    vs[arg][i] = std::max(0.0, vs[arg][i] + (x[i] - s));
  }
}

void drop_zero_vectors(std::vector<Vec>& vs) {
  std::erase_if(vs, [](const Vec& v) { return vec_norm(v) <= 0.0; });
}

// ---------------------------------------------------------------------------
// Lattice convex-envelope LP.

void enumerate_compositions(std::size_t m, int total, std::vector<Vec>& out) {
  std::vector<int> c(m, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
    if (pos + 1 == m) {
      c[pos] = left;
      Vec p(m);
      for (std::size_t i = 0; i < m; ++i) p[i] = static_cast<double>(c[i]) / total;
      out.push_back(std::move(p));
      return;
    }
    for (int v = left; v >= 0; --v) {
      c[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, total);
}

double binom(std::size_t n, std::size_t r) {
  double b = 1.0;
  for (std::size_t i = 1; i <= r; ++i) b = b * static_cast<double>(n - r + i) / static_cast<double>(i);
  return b;
}

int lattice_resolution_for(std::size_t m, std::size_t budget) {
  if (m <= 1) return 1;
  int N = 1;
  while (binom(static_cast<std::size_t>(N + 1) + m - 1, m - 1) <= static_cast<double>(budget) && N < 100000) ++N;
  return N;
}

struct LpState {
  std::vector<std::size_t> basis;  // empty: start from the unit vertices
  Eigen::VectorXd lambda;
  Eigen::VectorXd y;  // duals
};

// Revised simplex on: min sum lambda_v g_v  s.t.  sum lambda_v v = u, lambda >= 0.
// Any previous optimal basis stays feasible when columns are appended.
void solve_envelope_lp(const std::vector<Vec>& pts, const std::vector<double>& g, const Vec& u, LpState& st) {
  const std::size_t m = u.size();
  const auto mi = static_cast<Eigen::Index>(m);
  if (st.basis.size() != m) {
    st.basis.assign(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < pts.size(); ++p) {
        if (pts[p][i] == 1.0) {
          st.basis[i] = p;
          break;
        }
      }
    }
  }
  auto& basis = st.basis;
  const Eigen::Map<const Eigen::VectorXd> ue(u.data(), mi);
  double gscale = 1e-300;
  for (double v : g) gscale = std::max(gscale, std::abs(v));
  const double rc_tol = 1e-13 * gscale;

  for (int iter = 0; iter < 20000; ++iter) {
    Eigen::MatrixXd B(mi, mi);
    Eigen::VectorXd cB(mi);
    for (Eigen::Index t = 0; t < mi; ++t) {
      for (Eigen::Index i = 0; i < mi; ++i) B(i, t) = pts[basis[static_cast<std::size_t>(t)]][static_cast<std::size_t>(i)];
      cB(t) = g[basis[static_cast<std::size_t>(t)]];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    st.lambda = lu.solve(ue);
    st.y = lu.transpose().solve(cB);
    // Dantzig pricing; Bland (first improving column) after many iterations to break cycles.
    const bool bland = iter > 2000;
    std::size_t enter = pts.size();
    double best_rc = -rc_tol;
    for (std::size_t p = 0; p < pts.size(); ++p) {
      double yv = 0.0;
      for (std::size_t i = 0; i < m; ++i) yv += st.y(static_cast<Eigen::Index>(i)) * pts[p][i];
      const double rc = g[p] - yv;
      if (rc < best_rc) {
        best_rc = rc;
        enter = p;
        if (bland) break;
      }
    }
    if (enter == pts.size()) break;
    const Eigen::Map<const Eigen::VectorXd> col(pts[enter].data(), mi);
    const Eigen::VectorXd d = lu.solve(col);
    Eigen::Index leave = -1;
    double step = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < mi; ++t) {
      if (d(t) > 1e-12) {
        const double r = std::max(0.0, st.lambda(t)) / d(t);
        if (r < step) {
          step = r;
          leave = t;
        }
      }
    }
    if (leave < 0) break;  // unbounded cannot happen on the simplex; bail out safely
    basis[static_cast<std::size_t>(leave)] = enter;
  }
}

std::vector<std::pair<std::size_t, double>> lp_solution(const LpState& st) {
  std::vector<std::pair<std::size_t, double>> sol;
  for (std::size_t t = 0; t < st.basis.size(); ++t) {
    const double l = st.lambda(static_cast<Eigen::Index>(t));
    if (l > 0.0) sol.emplace_back(st.basis[t], l);
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Nelder-Mead with adaptive coefficients.

struct NMResult {
  Vec x;
  double f = 0.0;
  int iterations = 0;
};

NMResult nelder_mead(const std::function<double(const Vec&)>& f, Vec x0, double step, int max_iter, int stall_iter,
                     double stall_tol) {
  const std::size_t D = x0.size();
  const double nd = static_cast<double>(D);
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / nd;
  const double gamma = 0.75 - 1.0 / (2.0 * nd);
  const double delta = 1.0 - 1.0 / nd;

  std::vector<Vec> sx(D + 1, x0);
  std::vector<double> fx(D + 1);
  for (std::size_t i = 0; i < D; ++i) sx[i + 1][i] += step;
  for (std::size_t i = 0; i <= D; ++i) fx[i] = f(sx[i]);

  std::vector<std::size_t> order(D + 1);
  Vec centroid(D), xr(D), xe(D), xc(D);
  int it = 0;
  double last_best = std::numeric_limits<double>::infinity();
  int since_improve = 0;
  for (; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
    const std::size_t best = order[0];
    const std::size_t worst = order[D];
    const std::size_t second = order[D - 1];
    if (last_best - fx[best] > stall_tol) {
      last_best = fx[best];
      since_improve = 0;
    } else if (++since_improve >= stall_iter) {
      break;
    }
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t r = 0; r < D; ++r) {
      const auto& p = sx[order[r]];
      for (std::size_t i = 0; i < D; ++i) centroid[i] += p[i];
    }
    for (double& c : centroid) c /= nd;
    for (std::size_t i = 0; i < D; ++i) xr[i] = centroid[i] + alpha * (centroid[i] - sx[worst][i]);
    const double fr = f(xr);
    if (fr < fx[best]) {
      for (std::size_t i = 0; i < D; ++i) xe[i] = centroid[i] + beta * (xr[i] - centroid[i]);
      const double fe = f(xe);
      if (fe < fr) {
        sx[worst] = xe;
        fx[worst] = fe;
      } else {
        sx[worst] = xr;
        fx[worst] = fr;
      }
      continue;
    }
    if (fr < fx[second]) {
      sx[worst] = xr;
      fx[worst] = fr;
      continue;
    }
    const bool outside = fr < fx[worst];
    for (std::size_t i = 0; i < D; ++i) {
      xc[i] = outside ? centroid[i] + gamma * (xr[i] - centroid[i]) : centroid[i] - gamma * (centroid[i] - sx[worst][i]);
    }
    const double fc = f(xc);
    if (fc < (outside ? fr : fx[worst])) {
      sx[worst] = xc;
      fx[worst] = fc;
      continue;
    }
    for (std::size_t r = 1; r <= D; ++r) {
      auto& p = sx[order[r]];
      for (std::size_t i = 0; i < D; ++i) p[i] = sx[best][i] + delta * (p[i] - sx[best][i]);
      fx[order[r]] = f(p);
    }
  }
  const auto bi = static_cast<std::size_t>(std::min_element(fx.begin(), fx.end()) - fx.begin());
  return {sx[bi], fx[bi], it};
}

// ---------------------------------------------------------------------------
// Softmax-share parametrisation: vector t, coordinate i gets x_i * sigma_ti.

struct ShareModel {
  std::size_t T;
  std::size_t m;
  const Vec& x;
  const QMatrix& Q;

  std::vector<Vec> vectors(const Vec& theta) const {
    std::vector<Vec> vs(T, Vec(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < T; ++t) mx = std::max(mx, theta[t * m + i]);
      double z = 0.0;
      for (std::size_t t = 0; t < T; ++t) z += std::exp(theta[t * m + i] - mx);
      for (std::size_t t = 0; t < T; ++t) vs[t][i] = x[i] * std::exp(theta[t * m + i] - mx) / z;
    }
    return vs;
  }

  double cost(const Vec& theta) const {
    double c = 0.0;
    std::array<double, 32> v{};
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t i = 0; i < m; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < T; ++s) mx = std::max(mx, theta[s * m + i]);
        double z = 0.0;
        for (std::size_t s = 0; s < T; ++s) z += std::exp(theta[s * m + i] - mx);
        v[i] = x[i] * std::exp(theta[t * m + i] - mx) / z;
      }
      c += kernels::corner_value(std::span<const double>(v.data(), m), Q);
    }
    return c;
  }

  Vec theta_from_vectors(const std::vector<Vec>& vs) const {
    Vec th(T * m, kLogitFloor);
    for (std::size_t t = 0; t < std::min(T, vs.size()); ++t) {
      for (std::size_t i = 0; i < m; ++i) {
        const double share = vs[t][i] / x[i];
        th[t * m + i] = share > 0.0 ? std::max(kLogitFloor, std::log(share)) : kLogitFloor;
      }
    }
    return th;
  }
};

// ---------------------------------------------------------------------------
// Pairwise transfer of one coordinate between two vectors, golden-section refined.

void polish(std::vector<Vec>& vs, const QMatrix& Q, int max_sweeps = 60) {
  const std::size_t T = vs.size();
  if (T < 2) return;
  const std::size_t m = Q.size();
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  std::vector<double> wv(T);
  for (std::size_t t = 0; t < T; ++t) wv[t] = kernels::corner_value(vs[t], Q);
  Vec a, b;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double gain = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t s = 0; s < T; ++s) {
        for (std::size_t t = s + 1; t < T; ++t) {
          // theta moves coordinate i from t to s; theta in [-vs[s][i], vs[t][i]].
          const double lo = -vs[s][i];
          const double hi = vs[t][i];
          if (hi - lo <= 0.0) continue;
          auto phi = [&](double th) {
            a = vs[s];
            b = vs[t];
            a[i] = std::max(0.0, a[i] + th);
            b[i] = std::max(0.0, b[i] - th);
            return kernels::corner_value(a, Q) + kernels::corner_value(b, Q);
          };
          const double f0 = wv[s] + wv[t];
          double best_th = 0.0;
          double best_f = f0;
          for (double cand : {lo, hi}) {
            const double fc = phi(cand);
            if (fc < best_f) {
              best_f = fc;
              best_th = cand;
            }
          }
          double l = lo;
          double h = hi;
          double c1 = h - invphi * (h - l);
          double c2 = l + invphi * (h - l);
          double f1 = phi(c1);
          double f2 = phi(c2);
          for (int it = 0; it < 80 && (h - l) > 1e-15 * (hi - lo); ++it) {
            if (f1 < f2) {
              h = c2;
              c2 = c1;
              f2 = f1;
              c1 = h - invphi * (h - l);
              f1 = phi(c1);
            } else {
              l = c1;
              c1 = c2;
              f1 = f2;
              c2 = l + invphi * (h - l);
              f2 = phi(c2);
            }
          }
          for (auto [th, fv] : {std::pair{c1, f1}, std::pair{c2, f2}}) {
            if (fv < best_f) {
              best_f = fv;
              best_th = th;
            }
          }
          if (best_f < f0 - 1e-15 * std::max(1.0, f0)) {
            if (best_th == lo) {
              vs[t][i] += vs[s][i];
              vs[s][i] = 0.0;
            } else if (best_th == hi) {
              vs[s][i] += vs[t][i];
              vs[t][i] = 0.0;
            } else {
              vs[s][i] = std::max(0.0, vs[s][i] + best_th);
              vs[t][i] = std::max(0.0, vs[t][i] - best_th);
            }
            wv[s] = kernels::corner_value(vs[s], Q);
            wv[t] = kernels::corner_value(vs[t], Q);
            gain += f0 - (wv[s] + wv[t]);
          }
        }
      }
    }
    if (gain <= 1e-14) break;
  }
}

std::vector<int> active_coords(std::span<const double> x) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

std::vector<Vec> to_compact(const std::vector<Vec>& vs, std::span<const int> active) {
  std::vector<Vec> out;
  out.reserve(vs.size());
  for (const auto& v : vs) {
    Vec c(active.size());
    for (std::size_t a = 0; a < active.size(); ++a) c[a] = v[static_cast<std::size_t>(active[a])];
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Vec> to_full(const std::vector<Vec>& vs, std::span<const int> active, std::size_t k) {
  std::vector<Vec> out;
  out.reserve(vs.size());
  for (const auto& v : vs) {
    Vec f(k, 0.0);
    for (std::size_t a = 0; a < active.size(); ++a) f[static_cast<std::size_t>(active[a])] = v[a];
    out.push_back(std::move(f));
  }
  return out;
}

// Simplex direction |z| / sum |z|; zero coordinates stay reachable.
Vec direction(const Vec& z) {
  Vec v(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += (v[i] = std::abs(z[i]));
  if (s > 0.0) {
    for (double& c : v) c /= s;
  }
  return v;
}

// Column generation on the envelope LP: local minimisation of the reduced cost
// g(v) - y.v from the basis columns and the best-priced lattice points, until
// no new direction prices out.
void refine_columns(std::vector<Vec>& pts, std::vector<double>& g, const Vec& u, const QMatrix& Qa, LpState& st,
                    int resolution) {
  const std::size_t m = u.size();
  const double h = 0.5 / resolution;
  constexpr std::size_t kLatticeStarts = 4;
  double last = std::numeric_limits<double>::infinity();
  for (int round = 0; round < 40; ++round) {
    const double tol = 1e-14 * std::max(1.0, std::abs(st.y.dot(Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(m)))));
    auto dual = [&](const Vec& v) {
      double yv = 0.0;
      for (std::size_t i = 0; i < m; ++i) yv += st.y(static_cast<Eigen::Index>(i)) * v[i];
      return yv;
    };
    auto rc = [&](const Vec& v) { return kernels::corner_value(v, Qa) - dual(v); };
    std::vector<std::size_t> from;
    for (auto [p, l] : lp_solution(st)) from.push_back(p);
    std::vector<std::pair<double, std::size_t>> priced;
    priced.reserve(pts.size());
    for (std::size_t p = 0; p < pts.size(); ++p) priced.emplace_back(g[p] - dual(pts[p]), p);
    const std::size_t take = std::min(kLatticeStarts, priced.size());
    std::partial_sort(priced.begin(), priced.begin() + static_cast<std::ptrdiff_t>(take), priced.end());
    for (std::size_t i = 0; i < take; ++i) from.push_back(priced[i].second);

    std::size_t added = 0;
    for (std::size_t p : from) {
      auto fn = [&](const Vec& z) { return rc(direction(z)); };
      auto r = nelder_mead(fn, pts[p], h, 4000, 60, 1e-17);
      double step = h;
      for (int restart = 0; restart < 6 && step > 1e-9; ++restart) {
        auto nr = nelder_mead(fn, r.x, step, 4000, 60, 1e-17);
        if (nr.f < r.f - 1e-3 * std::abs(r.f)) {
          r = std::move(nr);
        } else {
          if (nr.f < r.f) r = std::move(nr);
          step *= 0.1;
        }
      }
      if (r.f < -tol) {
        const Vec v = direction(r.x);
        pts.push_back(v);
        g.push_back(kernels::corner_value(v, Qa));
        ++added;
      }
    }
    if (added == 0) break;
    solve_envelope_lp(pts, g, u, st);
    double value = 0.0;
    for (auto [p, l] : lp_solution(st)) value += l * g[p];
    if (last - value <= 1e-14 * std::max(1.0, value)) break;
    last = value;
  }
}

// Compact-space lattice envelope: system summing to xa.
std::vector<Vec> lattice_system(const Vec& xa, const QMatrix& Qa, int resolution, bool refine = false) {
  const std::size_t m = xa.size();
  const double nx = vec_norm(xa);
  std::vector<Vec> pts;
  enumerate_compositions(m, resolution, pts);
  auto g = kernels::lattice_values(pts, Qa);
  Vec u(m);
  for (std::size_t i = 0; i < m; ++i) u[i] = xa[i] / nx;
  LpState st;
  solve_envelope_lp(pts, g, u, st);
  if (refine) refine_columns(pts, g, u, Qa, st, resolution);
  std::vector<Vec> vs;
  for (auto [p, l] : lp_solution(st)) {
    Vec v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = nx * l * pts[p][i];
    vs.push_back(std::move(v));
  }
  repair_sum(vs, xa);
  drop_zero_vectors(vs);
  return vs;
}

}  // namespace

double system_cost(const std::vector<Vec>& vectors, const QMatrix& Q) {
  double c = 0.0;
  for (const auto& v : vectors) c += kernels::corner_value(v, Q);
  return c;
}

std::vector<Vec> reduce_system(std::vector<Vec> vectors, const QMatrix& Q, std::size_t max_vectors) {
  drop_zero_vectors(vectors);
  if (vectors.empty()) return vectors;
  const std::size_t k = vectors.front().size();
  Vec target(k, 0.0);
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < k; ++i) target[i] += v[i];
  }
  while (vectors.size() > max_vectors) {
    const std::size_t T = vectors.size();
    Eigen::MatrixXd D(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(T));
    Eigen::VectorXd a(static_cast<Eigen::Index>(T));
    Eigen::VectorXd c(static_cast<Eigen::Index>(T));
    for (std::size_t t = 0; t < T; ++t) {
      const double n = vec_norm(vectors[t]);
      a(static_cast<Eigen::Index>(t)) = n;
      Vec d(k);
      for (std::size_t i = 0; i < k; ++i) {
        d[i] = vectors[t][i] / n;
        D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = d[i];
      }
      c(static_cast<Eigen::Index>(t)) = kernels::corner_value(d, Q);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
    const Eigen::MatrixXd ker = lu.kernel();
    if (ker.cols() == 0 || ker.col(0).norm() == 0.0) break;
    Eigen::VectorXd z = ker.col(0);
    if (c.dot(z) > 0.0) z = -z;
    double step = std::numeric_limits<double>::infinity();
    Eigen::Index hit = -1;
    for (Eigen::Index t = 0; t < z.size(); ++t) {
      if (z(t) < -1e-14) {
        const double r = a(t) / -z(t);
        if (r < step) {
          step = r;
          hit = t;
        }
      }
    }
    if (hit < 0) break;
    a += step * z;
    a(hit) = 0.0;
    std::vector<Vec> next;
    for (std::size_t t = 0; t < T; ++t) {
      const double at = a(static_cast<Eigen::Index>(t));
      if (at <= 0.0) continue;
      Vec v(k);
      for (std::size_t i = 0; i < k; ++i) v[i] = at * D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t));
      next.push_back(std::move(v));
    }
    vectors = std::move(next);
    repair_sum(vectors, target);
  }
  return vectors;
}

VectorSystem canonicalize(const VectorSystem& sys, const QMatrix& Q, std::size_t max_vectors) {
  std::vector<Vec> vs = sys.vectors;
  const auto& x = sys.target;
  const std::size_t k = x.size();
  repair_sum(vs, x);
  // Snap dust coordinates into the vector holding most of that coordinate.
  for (std::size_t i = 0; i < k; ++i) {
    if (vs.empty() || x[i] <= 0.0) continue;
    std::size_t arg = 0;
    for (std::size_t t = 0; t < vs.size(); ++t) {
      if (vs[t][i] > vs[arg][i]) arg = t;
    }
    for (std::size_t t = 0; t < vs.size(); ++t) {
      if (t != arg && vs[t][i] > 0.0 && vs[t][i] < 1e-9 * x[i]) {
        vs[arg][i] += vs[t][i];
        vs[t][i] = 0.0;
      }
    }
  }
  drop_zero_vectors(vs);
  // Merge same-support vectors when merging does not raise the cost.
  auto support_of = [](const Vec& v) {
    std::vector<bool> s(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) s[i] = v[i] > 0.0;
    return s;
  };
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t s = 0; s < vs.size() && !merged; ++s) {
      for (std::size_t t = s + 1; t < vs.size() && !merged; ++t) {
        if (support_of(vs[s]) != support_of(vs[t])) continue;
        Vec sum = vs[s];
        for (std::size_t i = 0; i < k; ++i) sum[i] += vs[t][i];
        const double sep = kernels::corner_value(vs[s], Q) + kernels::corner_value(vs[t], Q);
        if (kernels::corner_value(sum, Q) <= sep + 1e-12 * std::max(1.0, sep)) {
          vs[s] = std::move(sum);
          vs.erase(vs.begin() + static_cast<std::ptrdiff_t>(t));
          merged = true;
        }
      }
    }
  }
  vs = reduce_system(std::move(vs), Q, max_vectors);
  repair_sum(vs, x);
  drop_zero_vectors(vs);
  VectorSystem out;
  out.vectors = std::move(vs);
  out.target = x;
  out.total_cost = system_cost(out.vectors, Q);
  return out;
}

VectorSystem lattice_envelope(std::span<const double> x, const QMatrix& Q, int resolution) {
  if (x.size() != Q.size()) throw std::invalid_argument("lattice_envelope: dimension mismatch");
  if (resolution < 1) throw std::invalid_argument("lattice_envelope: resolution must be positive");
  const auto active = active_coords(x);
  VectorSystem out;
  out.target.assign(x.begin(), x.end());
  if (active.empty()) return out;
  const QMatrix Qa = Q.restricted(active);
  Vec xa(active.size());
  for (std::size_t a = 0; a < active.size(); ++a) xa[a] = x[static_cast<std::size_t>(active[a])];
  out.vectors = to_full(lattice_system(xa, Qa, resolution), active, x.size());
  out.total_cost = system_cost(out.vectors, Q);
  return out;
}

VectorSystem w_star(std::span<const double> x, const QMatrix& Q, const OptimizerConfig& cfg,
                    std::span<const VectorSystem> seeds) {
  if (x.size() != Q.size()) throw std::invalid_argument("w_star: dimension mismatch");
  for (double v : x) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("w_star: x must be finite and nonnegative");
  }
  if (Q.size() > 12) throw std::invalid_argument("w_star: k must be at most 12");
  const std::size_t k = x.size();
  const auto active = active_coords(x);
  const std::size_t m = active.size();

  VectorSystem result;
  result.target.assign(x.begin(), x.end());
  if (m == 0) return result;

  // Optimise on the unit-norm direction and rescale: w and w* are 1-homogeneous.
  const QMatrix Qa = Q.restricted(active);
  const double nx = norm1(x);
  Vec xa(m);
  for (std::size_t a = 0; a < m; ++a) xa[a] = x[static_cast<std::size_t>(active[a])] / nx;
  const std::size_t T = cfg.max_vectors > 0 ? std::min<std::size_t>(static_cast<std::size_t>(cfg.max_vectors), m) : m;

  // Direct candidates, each a system in compact coordinates.
  std::vector<std::vector<Vec>> candidates;
  candidates.push_back({xa});  // trivial: the balanced strategy
  if (m <= T) {
    std::vector<Vec> diag;
    for (std::size_t i = 0; i < m; ++i) {
      Vec v(m, 0.0);
      v[i] = xa[i];
      diag.push_back(std::move(v));
    }
    candidates.push_back(std::move(diag));
  }
  for (const auto& s : seeds) {
    if (s.vectors.empty()) continue;
    for (const auto& v : s.vectors) {
      if (v.size() != k) throw std::invalid_argument("w_star: seed vector has wrong dimension");
    }
    auto cs = to_compact(s.vectors, active);
    for (auto& v : cs) {
      for (double& c : v) c /= nx;
    }
    repair_sum(cs, xa);
    drop_zero_vectors(cs);
    candidates.push_back(reduce_system(std::move(cs), Qa, T));
  }
  std::vector<Vec> lattice;
  if (cfg.lattice_seed && m >= 2 && m <= 6) {
    const int N = lattice_resolution_for(m, cfg.lattice_budget);
    lattice = reduce_system(lattice_system(xa, Qa, N, true), Qa, T);
    auto pol = lattice;
    polish(pol, Qa);
    candidates.push_back(lattice);
    candidates.push_back(std::move(pol));
  }

  // Multistart Nelder-Mead in T*m dimensions.
  if (m >= 2 && T >= 2 && cfg.multistart > 0) {
    const ShareModel model{T, m, xa, Qa};
    std::vector<Vec> starts;
    {
      Vec th(T * m, kLogitFloor);
      for (std::size_t i = 0; i < m; ++i) th[i] = 0.0;
      starts.push_back(std::move(th));
    }
    if (!lattice.empty()) starts.push_back(model.theta_from_vectors(lattice));
    for (const auto& c : candidates) {
      if (c.size() >= 2 && starts.size() < static_cast<std::size_t>(cfg.multistart)) starts.push_back(model.theta_from_vectors(c));
    }
    if (m <= 3) {
      // Every assignment of whole coordinates to vectors.
      std::size_t patterns = 1;
      for (std::size_t i = 0; i < m; ++i) patterns *= T;
      for (std::size_t p = 0; p < patterns && starts.size() < static_cast<std::size_t>(cfg.multistart); ++p) {
        Vec th(T * m, -4.0);
        std::size_t code = p;
        for (std::size_t i = 0; i < m; ++i) {
          th[(code % T) * m + i] = 0.0;
          code /= T;
        }
        starts.push_back(std::move(th));
      }
    }
    for (std::size_t s = starts.size(); s < static_cast<std::size_t>(cfg.multistart); ++s) {
      auto eng = rng::make_engine(cfg.seed, rng::Stream::kOptimizer, s);
      Vec th(T * m);
      for (auto& v : th) v = std::log(std::max(1e-300, rng::exp1(eng)));  // Dirichlet(1) shares
      starts.push_back(std::move(th));
    }
    starts.resize(std::min<std::size_t>(starts.size(), static_cast<std::size_t>(std::max(1, cfg.multistart))));

    std::vector<std::vector<Vec>> found(starts.size());
    std::vector<double> found_cost(starts.size());
    const auto ns = static_cast<std::int64_t>(starts.size());
    const bool do_polish = m <= 6;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t si = 0; si < ns; ++si) {
      const auto s = static_cast<std::size_t>(si);
      auto fn = [&](const Vec& th) { return model.cost(th); };
      NMResult r{starts[s], fn(starts[s]), 0};
      int budget = cfg.max_iterations;
      double step = 1.0;
      for (int round = 0; round < 4 && budget > 0; ++round) {
        auto nr = nelder_mead(fn, r.x, step, budget, cfg.stall_iterations, cfg.stall_tolerance);
        budget -= std::max(1, nr.iterations);
        const bool improved = nr.f < r.f - cfg.stall_tolerance;
        if (nr.f < r.f) r = std::move(nr);
        if (!improved && round > 0) break;
        step *= 0.5;
      }
      auto vs = model.vectors(r.x);
      repair_sum(vs, xa);
      if (do_polish) polish(vs, Qa);
      found_cost[s] = system_cost(vs, Qa);
      found[s] = std::move(vs);
    }
    for (std::size_t s = 0; s < found.size(); ++s) candidates.push_back(std::move(found[s]));
  }

  // Best candidate, ties to the earliest.
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (candidates[c].size() > T) continue;
    const double cc = system_cost(candidates[c], Qa);
    if (cc < best_cost) {
      best_cost = cc;
      best = c;
    }
  }
  VectorSystem compact;
  compact.vectors = candidates[best];
  compact.target = xa;
  compact = canonicalize(compact, Qa, T);
  if (compact.total_cost > best_cost) {
    compact.vectors = candidates[best];
    compact.total_cost = best_cost;
  }

  for (auto& v : compact.vectors) {
    for (double& c : v) c *= nx;
  }
  result.vectors = to_full(compact.vectors, active, k);
  repair_sum(result.vectors, x);
  result.total_cost = system_cost(result.vectors, Q);

  if (T >= m) {
    const auto b = w_star_bounds(x, Q);
    const double wx = w_value(x, Q);
    const double tol = 1e-9 * std::max(1.0, b.upper);
    if (result.total_cost < b.lower - tol || result.total_cost > std::min(b.upper, wx) + tol) {
      throw OptimizerError("w_star: cost " + std::to_string(result.total_cost) + " outside bracket [" +
                           std::to_string(b.lower) + ", " + std::to_string(std::min(b.upper, wx)) + "]");
    }
  }
  return result;
}

}  // namespace gchroma
