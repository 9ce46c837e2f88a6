#include <doctest.h>

#include <cmath>

#include "gchroma/qcore.hpp"
#include "gchroma/rng.hpp"

using namespace gchroma;

namespace {

const double kLog2 = std::log(2.0);

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

// Independent oracle: every corner evaluated from the definition.
struct Brute {
  double value = 0.0;
  std::vector<std::vector<int>> maximisers;
};

Brute brute_corners(const Vec& x, const QMatrix& Q) {
  const std::size_t k = x.size();
  std::vector<double> vals(std::size_t{1} << k);
  Brute b;
  for (std::size_t m = 0; m < vals.size(); ++m) {
    double num = 0.0;
    double nrm = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (!((m >> i) & 1U)) continue;
      nrm += x[i];
      for (std::size_t j = 0; j < k; ++j) {
        if ((m >> j) & 1U) num += x[i] * Q(i, j) * x[j];
      }
    }
    vals[m] = nrm > 0 ? num / nrm : 0.0;
    b.value = std::max(b.value, vals[m]);
  }
  for (std::size_t m = 0; m < vals.size(); ++m) {
    if (vals[m] >= b.value - 1e-11 * b.value) {
      std::vector<int> s;
      for (std::size_t i = 0; i < k; ++i) {
        if (((m >> i) & 1U) && x[i] > 0) s.push_back(static_cast<int>(i));
      }
      b.maximisers.push_back(s);
    }
  }
  return b;
}

}  // namespace

TEST_CASE("QMatrix validates its entries") {
  CHECK_THROWS_AS(QMatrix(2, {0, 1, 2, 0}), std::invalid_argument);
  CHECK_THROWS_AS(QMatrix(2, {0, -1, -1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(QMatrix(1, {INFINITY}), std::invalid_argument);
  CHECK_THROWS_AS(QMatrix(2, {0, 0, 0}), std::invalid_argument);
  const QMatrix Q = figure_q();
  CHECK(Q.q_star() == doctest::Approx(3 * kLog2));
  CHECK(Q.trace() == doctest::Approx(6 * kLog2));
  const std::vector<int> idx = {0, 2};
  const QMatrix R = Q.restricted(idx);
  CHECK(R(0, 1) == Q(0, 2));
  CHECK(R(1, 1) == Q(2, 2));
}

TEST_CASE("rayleigh ratio") {
  const QMatrix Q = figure_q();
  CHECK(rayleigh_ratio(Vec{0, 0, 0}, Q) == 0.0);
  CHECK(rayleigh_ratio(Vec{1.0 / 3, 1.0 / 3, 1.0 / 3}, Q) == doctest::Approx(14.0 / 9 * kLog2).epsilon(1e-14));
  CHECK(rayleigh_ratio(Vec{0.7, 0, 0}, Q) == doctest::Approx(0.7 * Q(0, 0)).epsilon(1e-14));
  CHECK_THROWS_AS(rayleigh_ratio(Vec{1, 1}, Q), std::invalid_argument);
  CHECK_THROWS_AS(rayleigh_ratio(Vec{1, -1, 1}, Q), std::invalid_argument);
}

TEST_CASE("w_corner on the worked example and the zero vector") {
  const QMatrix Q = figure_q();
  const auto z = w_corner(Vec{1.0 / 3, 1.0 / 3, 1.0 / 3}, Q);
  CHECK(z.value == doctest::Approx(14.0 / 9 * kLog2).epsilon(1e-13));
  CHECK(z.support == std::vector<int>{0, 1, 2});
  const auto zero = w_corner(Vec{0, 0, 0}, Q);
  CHECK(zero.value == 0.0);
  CHECK(zero.support.empty());
  CHECK_THROWS_AS(w_corner(Vec(26, 1.0), QMatrix(26, std::vector<double>(26 * 26, 1.0))), std::invalid_argument);
}

TEST_CASE("w_corner matches brute-force enumeration and witness consistency") {
  auto e = rng::make_engine(11, rng::Stream::kInstances, 0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 1 + rng::below(e, 7);
    const QMatrix Q = random_q(e, k);
    Vec x(k);
    for (auto& v : x) v = rng::u01(e) < 0.2 ? 0.0 : rng::u01(e);
    const auto z = w_corner(x, Q);
    const auto b = brute_corners(x, Q);
    CHECK(z.value == doctest::Approx(b.value).epsilon(1e-12));
    CHECK(z.value == doctest::Approx(rayleigh_ratio(z.vector, Q)).epsilon(1e-12));
    for (std::size_t i = 0; i < k; ++i) {
      const bool in = std::find(z.support.begin(), z.support.end(), static_cast<int>(i)) != z.support.end();
      CHECK(z.vector[i] == (in ? x[i] : 0.0));
    }
    // No interior point of the box beats the corner.
    for (int s = 0; s < 20; ++s) {
      Vec y(k);
      for (std::size_t i = 0; i < k; ++i) y[i] = rng::u01(e) * x[i];
      CHECK(rayleigh_ratio(y, Q) <= z.value + 1e-12);
    }
    CHECK(w_value(x, Q) == doctest::Approx(z.value).epsilon(1e-12));
  }
}

TEST_CASE("grid oracle") {
  const QMatrix Q = figure_q();
  const Vec u{1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK(std::abs(w_grid_oracle(u, Q, 400) - 14.0 / 9 * kLog2) < 0.02);
  const QMatrix Q4 = QMatrix(4, {1, 2, 3, 4, 2, 5, 6, 7, 3, 6, 8, 9, 4, 7, 9, 10});
  CHECK(w_grid_oracle(Vec{1, 0, 0, 0}, Q4, 7) == doctest::Approx(1.0));
  CHECK_THROWS_AS(w_grid_oracle(Vec(5, 1.0), QMatrix(5, std::vector<double>(25, 1.0)), 3), std::invalid_argument);
  auto e = rng::make_engine(12, rng::Stream::kInstances, 0);
  for (int t = 0; t < 30; ++t) {
    const QMatrix R = random_q(e, 4);
    Vec x(4);
    for (auto& v : x) v = rng::u01(e);
    const double w = w_corner(x, R).value;
    CHECK(w_grid_oracle(x, R, 1) == doctest::Approx(w).epsilon(1e-12));
    const double g = w_grid_oracle(x, R, 30);
    CHECK(g <= w + 1e-12);
    CHECK(w - g <= 1e-12);  // the grid contains every corner
  }
}

TEST_CASE("minimal corner tie-breaking") {
  const QMatrix D = QMatrix::from_rows({{2.0, 0.0}, {0.0, 2.0}});
  CHECK(minimal_corner(Vec{1, 1}, D).support == std::vector<int>{0});
  // Both singletons and the pair tie at 2; the smallest norm wins.
  const QMatrix D2 = QMatrix::from_rows({{1.0, 0.0}, {0.0, 2.0}});
  CHECK(maximizing_corners(Vec{2, 1}, D2).size() == 3);
  CHECK(minimal_corner(Vec{2, 1}, D2).support == std::vector<int>{1});
  const auto figure = brute_corners(Vec{1.0 / 3, 1.0 / 3, 1.0 / 3}, figure_q());
  REQUIRE(figure.maximisers.size() == 1);
  CHECK(minimal_corner(Vec{1.0 / 3, 1.0 / 3, 1.0 / 3}, figure_q()).support == figure.maximisers[0]);
  auto e = rng::make_engine(13, rng::Stream::kInstances, 0);
  for (int t = 0; t < 100; ++t) {
    const QMatrix Q = random_q(e, 4);
    Vec x{rng::u01(e), 0.0, rng::u01(e), rng::u01(e)};
    const auto z = minimal_corner(x, Q);
    CHECK(std::find(z.support.begin(), z.support.end(), 1) == z.support.end());
  }
}

TEST_CASE("maximizing corners are all listed") {
  const QMatrix D = QMatrix::from_rows({{2.0, 0.0}, {0.0, 2.0}});
  CHECK(maximizing_corners(Vec{1, 1}, D).size() == 3);
  auto e = rng::make_engine(14, rng::Stream::kInstances, 0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> q(9);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = i; j < 3; ++j) q[i * 3 + j] = q[j * 3 + i] = static_cast<double>(rng::below(e, 3));
    }
    const QMatrix Q(3, q);
    const Vec x{1, 1, 1};
    CHECK(maximizing_corners(x, Q).size() == brute_corners(x, Q).maximisers.size());
  }
}

TEST_CASE("pseudodefinite check") {
  const QMatrix F = figure_q();
  const std::vector<int> all = {0, 1, 2};
  CHECK_FALSE(pseudodefinite_check(F, all));
  const Vec y{2, -1, -1};
  double yqy = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) yqy += y[i] * F(i, j) * y[j];
  }
  CHECK(yqy == doctest::Approx(-kLog2));

  // Family with q_ii = log((1-p)/(1-p0)) + log(1/(1-p)) and q_ij = log(1/(1-p)).
  const double p = 0.3;
  const double p0 = 0.6;
  std::vector<double> q(16, -std::log1p(-p));
  for (std::size_t i = 0; i < 4; ++i) q[i * 5] = std::log((1 - p) / (1 - p0)) - std::log1p(-p);
  const std::vector<int> four = {0, 1, 2, 3};
  CHECK(pseudodefinite_check(QMatrix(4, q), four));

  const std::vector<int> one = {1};
  CHECK(pseudodefinite_check(F, one));
  CHECK_THROWS_AS(pseudodefinite_check(F, std::vector<int>{}), std::invalid_argument);

  // Two-element supports: the hyperplane is spanned by (1,-1).
  auto e = rng::make_engine(15, rng::Stream::kInstances, 0);
  for (int t = 0; t < 200; ++t) {
    const QMatrix Q = random_q(e, 3);
    const std::vector<int> s = {0, 2};
    const double form = Q(0, 0) + Q(2, 2) - 2 * Q(0, 2);
    if (std::abs(form) > 1e-9) CHECK(pseudodefinite_check(Q, s) == (form >= 0));
  }
}

TEST_CASE("balanced optimality check") {
  CHECK_FALSE(balanced_optimality_check(Vec{1.0 / 3, 1.0 / 3, 1.0 / 3}, figure_q()));
  // Equal blocks, decreasing diagonal p_i, common off-diagonal p.
  const Vec pd{0.8, 0.6, 0.5};
  const double p = 0.4;
  std::vector<double> q(9, -std::log1p(-p));
  for (std::size_t i = 0; i < 3; ++i) q[i * 4] = -std::log1p(-pd[i]);
  CHECK(balanced_optimality_check(Vec{1.0 / 3, 1.0 / 3, 1.0 / 3}, QMatrix(3, q)));
  CHECK(balanced_optimality_check(Vec{0.4}, QMatrix(1, {2.5})));
}

TEST_CASE("w* bounds") {
  const double c = 0.7;
  const QMatrix J(3, std::vector<double>(9, c));
  const Vec x{0.2, 0.5, 0.9};
  const auto b = w_star_bounds(x, J);
  CHECK(b.lower == doctest::Approx(c * 1.6 / 3));
  CHECK(b.upper == doctest::Approx(c * 1.6));
  const auto z = w_star_bounds(Vec{0, 0, 0}, J);
  CHECK(z.lower == 0.0);
  CHECK(z.upper == 0.0);
  const auto f = w_star_bounds(Vec{1.0 / 3, 1.0 / 3, 1.0 / 3}, figure_q());
  CHECK(f.lower == doctest::Approx(2.0 / 3 * kLog2));
  CHECK(f.upper == doctest::Approx(2 * kLog2));
  const auto zq = w_star_bounds(Vec{1, 1}, QMatrix(2, {0, 1, 1, 0}));
  CHECK(zq.lower == 0.0);
}
