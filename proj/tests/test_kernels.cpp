#include <doctest.h>
#include <omp.h>

#include <cmath>

#include "gchroma/kernels.hpp"
#include "gchroma/rng.hpp"
#include "gchroma/sampler.hpp"

using namespace gchroma;

namespace {

QMatrix random_q(std::mt19937_64& e, std::size_t k) {
  std::vector<double> q(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) q[i * k + j] = q[j * k + i] = -std::log1p(-0.9 * rng::u01(e));
  }
  return QMatrix(k, q);
}

std::vector<int> iota(std::size_t k) {
  std::vector<int> a(k);
  for (std::size_t i = 0; i < k; ++i) a[i] = static_cast<int>(i);
  return a;
}

}  // namespace

TEST_CASE("parallel corner scan equals the serial reference") {
  auto e = rng::make_engine(21, rng::Stream::kInstances, 0);
  for (std::size_t k : {1, 2, 5, 9, 14, 16}) {
    for (int t = 0; t < 4; ++t) {
      const QMatrix Q = random_q(e, k);
      Vec x(k);
      for (auto& v : x) v = 0.05 + rng::u01(e);
      const auto act = iota(k);
      const auto s = kernels::serial::corner_max(x, Q, act);
      const auto p = kernels::corner_max(x, Q, act);
      CHECK(p.mask == s.mask);
      CHECK(p.value == doctest::Approx(s.value).epsilon(1e-12));
      CHECK(kernels::corner_value(x, Q) == doctest::Approx(s.value).epsilon(1e-12));
    }
  }
}

TEST_CASE("corner scan ties resolve to the smallest norm") {
  // Every subset of {0,1} attains 2 on this diagonal instance; {1} has the smallest norm.
  const QMatrix D = QMatrix::from_rows({{1.0, 0.0}, {0.0, 2.0}});
  const Vec x{2, 1};
  const auto act = iota(2);
  CHECK(kernels::serial::corner_max(x, D, act).mask == 0b10);
  CHECK(kernels::corner_max(x, D, act).mask == 0b10);
  CHECK(kernels::corner_precedes(0b10, 0b01, x, act));
  CHECK_FALSE(kernels::corner_precedes(0b11, 0b01, x, act));
}

TEST_CASE("corner scan results do not depend on the thread count") {
  auto e = rng::make_engine(22, rng::Stream::kInstances, 0);
  const QMatrix Q = random_q(e, 16);
  Vec x(16);
  for (auto& v : x) v = rng::u01(e);
  const auto act = iota(16);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = kernels::corner_max(x, Q, act);
  omp_set_num_threads(4);
  const auto four = kernels::corner_max(x, Q, act);
  omp_set_num_threads(saved);
  CHECK(one.mask == four.mask);
  CHECK(one.value == four.value);
}

TEST_CASE("edge sampler matches the serial reference bit for bit") {
  const std::vector<Vec> P = {{0.5, 0.2}, {0.2, 0.9}};
  for (std::size_t n : {1, 2, 63, 64, 65, 300}) {
    std::vector<int> blocks(n);
    for (std::size_t i = 0; i < n; ++i) blocks[i] = static_cast<int>(i % 2);
    BitMatrix a(n);
    BitMatrix b(n);
    kernels::serial::sample_edges(a, blocks, P, 99);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(3);
    kernels::sample_edges(b, blocks, P, 99);
    omp_set_num_threads(saved);
    CHECK(a == b);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK_FALSE(b.test(i, i));
      for (std::size_t j = 0; j < i; ++j) CHECK(b.test(i, j) == b.test(j, i));
    }
  }
}

TEST_CASE("lattice evaluation matches the serial reference") {
  auto e = rng::make_engine(23, rng::Stream::kInstances, 0);
  const QMatrix Q = random_q(e, 5);
  std::vector<Vec> pts;
  for (int p = 0; p < 500; ++p) {
    Vec v(5);
    for (auto& c : v) c = rng::u01(e) < 0.3 ? 0.0 : rng::exp1(e);
    pts.push_back(v);
  }
  const auto s = kernels::serial::lattice_values(pts, Q);
  const auto p = kernels::lattice_values(pts, Q);
  REQUIRE(s.size() == p.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(p[i] == doctest::Approx(s[i]).epsilon(1e-12));
}

TEST_CASE("too many active coordinates are rejected") {
  const QMatrix Q(33, std::vector<double>(33 * 33, 1.0));
  CHECK_THROWS_AS(kernels::corner_value(Vec(33, 1.0), Q), std::invalid_argument);
  CHECK_THROWS_AS(kernels::corner_max(Vec(33, 1.0), Q, iota(33)), std::invalid_argument);
}
