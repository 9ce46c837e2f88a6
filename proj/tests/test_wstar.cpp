#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gchroma/qcore.hpp"
#include "gchroma/rng.hpp"

using namespace gchroma;

namespace {

const double kLog2 = std::log(2.0);
const double kFigureStar = 2.0 * (5.0 + std::sqrt(3.0)) * kLog2 / 9.0;
const double kR = (3.0 * std::sqrt(3.0) - 5.0) / 2.0;

QMatrix figure_q() {
  return QMatrix::from_rows({{kLog2, kLog2, 2 * kLog2}, {kLog2, 2 * kLog2, kLog2}, {2 * kLog2, kLog2, 3 * kLog2}});
}

QMatrix random_q(std::mt19937_64& e, std::size_t k) {
  std::vector<double> q(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) q[i * k + j] = q[j * k + i] = -std::log1p(-0.95 * rng::u01(e));
  }
  return QMatrix(k, q);
}

OptimizerConfig fast() {
  OptimizerConfig c;
  c.multistart = 16;
  return c;
}

Vec sum_of(const std::vector<Vec>& vs, std::size_t k) {
  Vec s(k, 0.0);
  for (const auto& v : vs) {
    for (std::size_t i = 0; i < k; ++i) s[i] += v[i];
  }
  return s;
}

// Independent oracle for k = 2: lower convex envelope of t -> w(t, 1-t)
// on a fine grid (monotone chain), evaluated at the normalised point.
double envelope2(const Vec& x, const QMatrix& Q, int grid = 20000) {
  std::vector<std::pair<double, double>> hull;
  for (int i = 0; i <= grid; ++i) {
    const double t = static_cast<double>(i) / grid;
    const Vec y{t, 1.0 - t};
    const std::pair<double, double> p{t, w_value(y, Q)};
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      const double cross = (b.first - a.first) * (p.second - a.second) - (b.second - a.second) * (p.first - a.first);
      if (cross <= 0) hull.pop_back();
      else break;
    }
    hull.push_back(p);
  }
  const double n = x[0] + x[1];
  const double t = x[0] / n;
  for (std::size_t i = 1; i < hull.size(); ++i) {
    if (t <= hull[i].first) {
      const double s = (t - hull[i - 1].first) / (hull[i].first - hull[i - 1].first);
      return n * ((1 - s) * hull[i - 1].second + s * hull[i].second);
    }
  }
  return n * hull.back().second;
}

}  // namespace

TEST_CASE("figure example optimum and its two-type witness") {
  const Vec x{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const auto s = w_star(x, figure_q());
  CHECK(std::abs(s.total_cost - kFigureStar) < 1e-6);
  CHECK(system_cost(s.vectors, figure_q()) == doctest::Approx(s.total_cost).epsilon(1e-12));
  REQUIRE(s.vectors.size() == 2);
  const Vec total = sum_of(s.vectors, 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(total[i] == doctest::Approx(x[i]).epsilon(1e-12));
  // One type is proportional to (1, r, 0), the other to (0, 1-r, 1).
  const auto& a = s.vectors[0][2] == 0.0 ? s.vectors[0] : s.vectors[1];
  const auto& b = s.vectors[0][2] == 0.0 ? s.vectors[1] : s.vectors[0];
  REQUIRE(a[2] == 0.0);
  REQUIRE(b[0] == 0.0);
  CHECK(std::abs(a[1] / a[0] - kR) < 1e-3);
  CHECK(std::abs(b[1] / b[2] - (1 - kR)) < 1e-3);
}

TEST_CASE("bounds bracket w* and match hand values") {
  const Vec x{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const auto b = w_star_bounds(x, figure_q());
  CHECK(b.lower == doctest::Approx(2.0 / 3 * kLog2));
  CHECK(b.upper == doctest::Approx(2 * kLog2));
  const auto z = w_star_bounds(Vec{0, 0, 0}, figure_q());
  CHECK(z.lower == 0.0);
  CHECK(z.upper == 0.0);
  const QMatrix J(3, std::vector<double>(9, 0.7));
  const auto c = w_star_bounds(Vec{0.2, 0.5, 0.3}, J);
  CHECK(c.lower == doctest::Approx(0.7 / 3));
  CHECK(c.upper == doctest::Approx(0.7));
}

TEST_CASE("two-block instances match the lower convex envelope oracle") {
  auto e = rng::make_engine(31, rng::Stream::kInstances, 0);
  for (int t = 0; t < 40; ++t) {
    const QMatrix Q = random_q(e, 2);
    const Vec x{0.05 + rng::u01(e), 0.05 + rng::u01(e)};
    const double v = w_star(x, Q, fast()).total_cost;
    const double o = envelope2(x, Q);
    CHECK(v <= o + 1e-9);
    CHECK(v >= o - 1e-6);
  }
}

TEST_CASE("pseudodefinite matrices give w* = w") {
  auto e = rng::make_engine(32, rng::Stream::kInstances, 0);
  for (int t = 0; t < 20; ++t) {
    const std::size_t k = 2 + rng::below(e, 3);
    // Q = c J + diag(d) is PSD on the zero-sum hyperplane.
    const double c = rng::u01(e);
    std::vector<double> q(k * k, c);
    for (std::size_t i = 0; i < k; ++i) q[i * (k + 1)] += rng::u01(e);
    const QMatrix Q(k, q);
    Vec x(k);
    for (auto& v : x) v = 0.1 + rng::u01(e);
    REQUIRE(balanced_optimality_check(x, Q));
    CHECK(w_star(x, Q, fast()).total_cost == doctest::Approx(w_value(x, Q)).epsilon(1e-8));
  }
}

TEST_CASE("w* scales linearly and respects every candidate") {
  auto e = rng::make_engine(33, rng::Stream::kInstances, 0);
  for (int t = 0; t < 15; ++t) {
    const std::size_t k = 2 + rng::below(e, 3);
    const QMatrix Q = random_q(e, k);
    Vec x(k);
    for (auto& v : x) v = 0.1 + rng::u01(e);
    const double s = 0.1 + 9.9 * rng::u01(e);
    Vec sx = x;
    for (auto& v : sx) v *= s;
    const auto a = w_star(x, Q, fast());
    const auto b = w_star(sx, Q, fast());
    CHECK(b.total_cost == doctest::Approx(s * a.total_cost).epsilon(1e-8));
    CHECK(a.total_cost <= w_value(x, Q) + 1e-12);
    CHECK(a.vectors.size() <= k);
    const Vec tot = sum_of(a.vectors, k);
    for (std::size_t i = 0; i < k; ++i) CHECK(tot[i] == doctest::Approx(x[i]).epsilon(1e-12));
    for (const auto& v : a.vectors) {
      for (double c : v) CHECK(c >= 0.0);
    }
    // No random two-part split of x beats the optimiser.
    for (int r = 0; r < 50; ++r) {
      Vec u(k);
      Vec v(k);
      for (std::size_t i = 0; i < k; ++i) {
        const double f = rng::u01(e);
        u[i] = f * x[i];
        v[i] = x[i] - u[i];
      }
      CHECK(a.total_cost <= w_value(u, Q) + w_value(v, Q) + 1e-9);
    }
  }
}

TEST_CASE("five active coordinates: scale consistency and lattice bound") {
  auto e = rng::make_engine(35, rng::Stream::kInstances, 0);
  for (int t = 0; t < 4; ++t) {
    const QMatrix Q = random_q(e, 5);
    Vec x(5);
    for (auto& v : x) v = 0.01 + rng::u01(e);
    const double s = 0.5 + 5 * rng::u01(e);
    Vec sx = x;
    for (auto& v : sx) v *= s;
    const double a = w_star(x, Q, fast()).total_cost;
    const double b = w_star(sx, Q, fast()).total_cost;
    CHECK(std::abs(b - s * a) <= 1e-10 * s * a);
    CHECK(a <= lattice_envelope(x, Q, 12).total_cost + 1e-12);
  }
}

TEST_CASE("seed systems are never beaten by the result") {
  const QMatrix Q = figure_q();
  const Vec x{1.0 / 3, 1.0 / 3, 1.0 / 3};
  VectorSystem seed;
  seed.vectors = {{1.0 / 3, 0, 0}, {0, 1.0 / 3, 1.0 / 6}, {0, 0, 1.0 / 6}};
  seed.target = x;
  seed.total_cost = system_cost(seed.vectors, Q);
  OptimizerConfig c;
  c.multistart = 1;
  c.lattice_seed = false;
  const std::vector<VectorSystem> seeds{seed};
  CHECK(w_star(x, Q, c, seeds).total_cost <= seed.total_cost + 1e-12);
}

TEST_CASE("zero and one-dimensional inputs") {
  const QMatrix Q = figure_q();
  const auto z = w_star(Vec{0, 0, 0}, Q);
  CHECK(z.total_cost == 0.0);
  const auto one = w_star(Vec{0, 0.4, 0}, Q);
  CHECK(one.total_cost == doctest::Approx(0.4 * Q(1, 1)));
  const QMatrix Q1(1, {1.3});
  CHECK(w_star(Vec{2.0}, Q1).total_cost == doctest::Approx(2.6));
}

TEST_CASE("errors") {
  const QMatrix Q = figure_q();
  CHECK_THROWS_AS(w_star(Vec{1, 1}, Q), std::invalid_argument);
  CHECK_THROWS_AS(w_star(Vec{1, -1, 1}, Q), std::invalid_argument);
  const QMatrix big(13, std::vector<double>(169, 1.0));
  CHECK_THROWS_AS(w_star(Vec(13, 1.0), big), std::invalid_argument);
}

TEST_CASE("reduce_system keeps the sum and never raises the cost") {
  auto e = rng::make_engine(34, rng::Stream::kInstances, 0);
  for (int t = 0; t < 30; ++t) {
    const std::size_t k = 2 + rng::below(e, 3);
    const QMatrix Q = random_q(e, k);
    std::vector<Vec> vs(k + 3, Vec(k));
    for (auto& v : vs) {
      for (auto& c : v) c = rng::u01(e) < 0.3 ? 0.0 : rng::u01(e);
    }
    const Vec before = sum_of(vs, k);
    const double cost = system_cost(vs, Q);
    const auto r = reduce_system(vs, Q, k);
    CHECK(r.size() <= k);
    CHECK(system_cost(r, Q) <= cost + 1e-9);
    const Vec after = sum_of(r, k);
    for (std::size_t i = 0; i < k; ++i) CHECK(after[i] == doctest::Approx(before[i]).epsilon(1e-9));
  }
}

TEST_CASE("canonicalize merges same-support vectors") {
  const QMatrix Q = figure_q();
  VectorSystem s;
  s.vectors = {{0.1, 0.02, 0}, {0.2, 0.04, 0}, {0, 0.1, 0.2}, {0, 0, 0}};
  s.target = sum_of(s.vectors, 3);
  s.total_cost = system_cost(s.vectors, Q);
  const auto c = canonicalize(s, Q, 3);
  CHECK(c.vectors.size() == 2);
  CHECK(c.total_cost <= s.total_cost + 1e-12);
  const Vec tot = sum_of(c.vectors, 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(tot[i] == doctest::Approx(s.target[i]));
}

TEST_CASE("lattice envelope is an upper bound that tightens") {
  const QMatrix Q = figure_q();
  const Vec x{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const auto coarse = lattice_envelope(x, Q, 6);
  const auto fine = lattice_envelope(x, Q, 60);
  CHECK(coarse.total_cost >= kFigureStar - 1e-12);
  CHECK(fine.total_cost >= kFigureStar - 1e-12);
  CHECK(fine.total_cost <= coarse.total_cost + 1e-12);
  CHECK(fine.total_cost - kFigureStar < 1e-3);
  const Vec tot = sum_of(fine.vectors, 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(tot[i] == doctest::Approx(x[i]));
}
