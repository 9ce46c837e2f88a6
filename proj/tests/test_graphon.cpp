#include <doctest.h>

#include <cmath>

#include "gchroma/graphon.hpp"
#include "gchroma/rng.hpp"

using namespace gchroma;

namespace {

const double kLog2 = std::log(2.0);
const double kFigureStar = 2.0 * (5.0 + std::sqrt(3.0)) * kLog2 / 9.0;

BlockGraphon random_block(std::mt19937_64& e, std::size_t k, double pmax = 0.9) {
  BlockGraphon W;
  W.masses.resize(k);
  double s = 0.0;
  for (auto& m : W.masses) s += (m = 0.2 + rng::u01(e));
  for (auto& m : W.masses) m /= s;
  double t = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) t += W.masses[i];
  W.masses[k - 1] = 1.0 - t;
  W.P.assign(k, Vec(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) W.P[i][j] = W.P[j][i] = pmax * rng::u01(e);
  }
  return W;
}

OptimizerConfig fast() {
  OptimizerConfig c;
  c.multistart = 16;
  return c;
}

}  // namespace

TEST_CASE("q_of") {
  const QMatrix Q = q_of(BlockGraphon::figure_block());
  const double expect[3][3] = {{1, 1, 2}, {1, 2, 1}, {2, 1, 3}};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(Q(i, j) == doctest::Approx(expect[i][j] * kLog2).epsilon(1e-14));
  }
  CHECK(q_of(BlockGraphon::constant(0.0))(0, 0) == 0.0);
  CHECK(q_of(BlockGraphon::constant(1.0 - std::exp(-1.0)))(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  BlockGraphon bad{{1.0}, {{1.0}}};
  CHECK_THROWS_AS(q_of(bad), std::invalid_argument);
}

TEST_CASE("validation") {
  CHECK_THROWS_AS((BlockGraphon{{0.5, 0.4}, {{0.1, 0.1}, {0.1, 0.1}}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((BlockGraphon{{0.5, 0.5}, {{0.1, 0.2}, {0.1, 0.1}}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((BlockGraphon{{1.0, 0.0}, {{0.1, 0.1}, {0.1, 0.1}}}.validate()), std::invalid_argument);
  CHECK_NOTHROW(BlockGraphon::figure_block().validate());
  CHECK_THROWS_AS((BlockMeasure{{0.5, 0.6}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((BlockMeasure{{1.5, -0.5}}.validate()), std::invalid_argument);
  Decomposition bad{{{0.5, {{1.0, 0.0}}}, {0.5, {{1.0, 0.0}}}}};
  CHECK_THROWS_AS(bad.validate({0.5, 0.5}), std::invalid_argument);
  Decomposition good{{{0.5, {{1.0, 0.0}}}, {0.5, {{0.0, 1.0}}}}};
  CHECK_NOTHROW(good.validate({0.5, 0.5}));
  CHECK_THROWS_AS(GeneralGraphon::from_name("constant:1"), std::invalid_argument);
  CHECK_THROWS_AS(GeneralGraphon::from_name("constant:x"), std::invalid_argument);
  CHECK_THROWS_AS(GeneralGraphon::from_name("nope"), std::invalid_argument);
}

TEST_CASE("phi on the worked examples") {
  CHECK(phi(BlockGraphon::figure_block()) == doctest::Approx(14.0 / 9 * kLog2).epsilon(1e-13));
  CHECK(phi(BlockGraphon::w_right()) == doctest::Approx(1.25 * kLog2).epsilon(1e-13));
  CHECK(phi(BlockGraphon::constant(0.5)) == doctest::Approx(kLog2).epsilon(1e-14));
  const auto W = BlockGraphon::figure_block();
  CHECK(phi_mu({{1, 0, 0}}, W) == doctest::Approx(kLog2).epsilon(1e-13));
  CHECK(phi_mu({{0, 2.0 / 3, 1.0 / 3}}, W) == doctest::Approx(5.0 / 3 * kLog2).epsilon(1e-13));
  CHECK(phi_mu({{0, 0, 1}}, W) == doctest::Approx(3 * kLog2).epsilon(1e-13));
  CHECK_THROWS_AS(phi_mu({{0.5, 0.5}}, W), std::invalid_argument);
}

TEST_CASE("strategy ladder on the figure graphon") {
  const auto W = BlockGraphon::figure_block();
  CHECK(std::abs(strategy_cost(Decomposition::trivial(W.masses), W) - 14.0 / 9 * kLog2) < 1e-12);
  CHECK(std::abs(strategy_cost(figure_greedy_decomposition(), W) - 5.0 / 3 * kLog2) < 1e-12);
  CHECK(std::abs(strategy_cost(figure_optimal_decomposition(), W) - kFigureStar) < 1e-12);
}

TEST_CASE("phi_star") {
  const auto f = phi_star(BlockGraphon::figure_block());
  CHECK(std::abs(f.value - kFigureStar) < 1e-5);
  CHECK_NOTHROW(f.witness.validate(BlockGraphon::figure_block().masses));
  CHECK(strategy_cost(f.witness, BlockGraphon::figure_block()) == doctest::Approx(f.value).epsilon(1e-9));
  const auto r = phi_star(BlockGraphon::w_right(), fast());
  CHECK(std::abs(r.value - 1.25 * kLog2) < 1e-8);
  CHECK(phi_star(BlockGraphon::constant(0.3), fast()).value == doctest::Approx(-std::log1p(-0.3)).epsilon(1e-12));
}

TEST_CASE("closed forms") {
  CHECK(closed_form_block1({1.0}, 0.2, 0.6) == doctest::Approx(-std::log1p(-0.6)).epsilon(1e-14));
  CHECK(closed_form_block1({0.5, 0.3, 0.2}, 0.4, 0.4) == doctest::Approx(-std::log1p(-0.4)).epsilon(1e-14));
  CHECK(closed_form_block2({0.7}, 0.1) == doctest::Approx(-std::log1p(-0.7)).epsilon(1e-14));
  CHECK(closed_form_block2({0.3, 0.3, 0.3}, 0.3) == doctest::Approx(-std::log1p(-0.3)).epsilon(1e-14));
  CHECK_THROWS_AS(closed_form_block1({0.5, 0.5}, 0.7, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(closed_form_block1({0.3, 0.7}, 0.1, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(closed_form_block2({0.3, 0.5}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(closed_form_block2({0.5, 0.3}, 0.4), std::invalid_argument);

  auto e = rng::make_engine(41, rng::Stream::kInstances, 0);
  for (int t = 0; t < 8; ++t) {
    const std::size_t k = 2 + rng::below(e, 3);
    Vec l(k);
    double s = 0.0;
    for (auto& v : l) s += (v = 0.1 + rng::u01(e));
    for (auto& v : l) v /= s;
    std::sort(l.rbegin(), l.rend());
    const double p0 = 0.2 + 0.7 * rng::u01(e);
    const double p = p0 * rng::u01(e);
    const auto W = block1_graphon(l, p, p0);
    CHECK(phi_star(W, fast()).value == doctest::Approx(closed_form_block1(l, p, p0)).epsilon(1e-6));
    Vec pv(k);
    for (auto& v : pv) v = 0.1 + 0.85 * rng::u01(e);
    std::sort(pv.rbegin(), pv.rend());
    const double q = pv.back() * rng::u01(e);
    const auto W2 = block2_graphon(pv, q);
    CHECK(phi_star(W2, fast()).value == doctest::Approx(closed_form_block2(pv, q)).epsilon(1e-6));
  }
}

TEST_CASE("block approximations of W_L") {
  const auto L = GeneralGraphon::from_name("W_L");
  const auto up = block_upper(L, 2);
  const auto lo = block_lower(L, 2);
  CHECK(up.P == std::vector<Vec>{{0.75, 0.75}, {0.75, 0.5}});
  CHECK(lo.P == std::vector<Vec>{{0.75, 0.5}, {0.5, 0.5}});
  CHECK(!L.as_block().has_value());
}

TEST_CASE("block approximations bracket point values") {
  auto e = rng::make_engine(42, rng::Stream::kInstances, 0);
  std::vector<GeneralGraphon> gs = {GeneralGraphon::from_name("W_L"), GeneralGraphon::from_name("W_R"),
                                    GeneralGraphon::from_name("figure-block"), GeneralGraphon::constant(0.4)};
  std::vector<Vec> grid(6, Vec(6));
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = i; j < 6; ++j) grid[i][j] = grid[j][i] = 0.9 * rng::u01(e);
  }
  gs.push_back(GeneralGraphon::grid(grid));
  for (const auto& G : gs) {
    for (std::size_t k : {1, 2, 3, 5}) {
      const auto up = block_upper(G, k);
      const auto lo = block_lower(G, k);
      for (int s = 0; s < 2000; ++s) {
        const double x = rng::u01(e);
        const double y = rng::u01(e);
        const auto i = static_cast<std::size_t>(x * static_cast<double>(k));
        const auto j = static_cast<std::size_t>(y * static_cast<double>(k));
        CHECK(lo.P[i][j] <= G.value(x, y));
        CHECK(G.value(x, y) <= up.P[i][j]);
      }
      CHECK(phi(lo) <= phi(up) + 1e-12);
    }
  }
  const auto grid_g = GeneralGraphon::grid(grid);
  CHECK(block_upper(grid_g, 6).P == grid);
  CHECK(block_lower(grid_g, 6).P == grid);
  CHECK_THROWS_AS(block_upper(grid_g, 7), std::invalid_argument);
  CHECK(block_upper(GeneralGraphon::constant(0.4), 3).P == std::vector<Vec>(3, Vec(3, 0.4)));
}

TEST_CASE("W_L strip strategy cost") {
  double prev = INFINITY;
  for (std::size_t k : {1, 2, 4, 8, 16}) {
    const auto s = strip_decomposition_WL(k);
    CHECK_NOTHROW(s.decomposition.validate(s.refinement.masses));
    const double expect = 1.25 * kLog2 + 0.75 * kLog2 / static_cast<double>(2 * k + 1);
    CHECK(s.cost == doctest::Approx(expect).epsilon(1e-12));
    CHECK(s.cost - 1.25 * kLog2 > 0);
    CHECK(s.cost < prev);
    prev = s.cost;
  }
  const double r = (strip_decomposition_WL(8).cost - 1.25 * kLog2) / (strip_decomposition_WL(2).cost - 1.25 * kLog2);
  CHECK(r == doctest::Approx(5.0 / 17));
  CHECK(strip_decomposition_WL(16).cost - 1.25 * kLog2 < 0.1);
  CHECK_THROWS_AS(strip_decomposition_WL(0), std::invalid_argument);
}

TEST_CASE("stability bounds") {
  const auto z = stability_bound(0.5, 0, 0, 0, 3);
  CHECK(z.bound_a == 0.0);
  CHECK(z.bound_b == 0.0);
  CHECK(z.bound_c == 0.0);
  CHECK(std::isnan(stability_bound(0.5, 0.1, 0, 0.1).bound_b));
  CHECK(stability_bound(0.25, 0.1, 0.05, 0.3, 4).bound_a == doctest::Approx(0.8));
  CHECK(stability_bound(0.25, 0.1, 0.05, 0.1, 4).bound_b == doctest::Approx(0.8));
  CHECK_THROWS_AS(stability_bound(0.0, 0, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(stability_bound(1.0, 0, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(stability_bound(0.5, -1, 0, 0), std::invalid_argument);

  auto e = rng::make_engine(43, rng::Stream::kInstances, 0);
  for (int t = 0; t < 30; ++t) {
    const std::size_t k = 1 + rng::below(e, 4);
    const auto W = random_block(e, k);
    auto V = W;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i; j < k; ++j) {
        V.P[i][j] = V.P[j][i] = std::clamp(W.P[i][j] + 0.1 * (rng::u01(e) - 0.5), 0.0, 0.9);
      }
    }
    const double eps = 1.0 - std::max(W.max_p(), V.max_p());
    const double delta = 0.03;
    std::vector<char> in_s(k, 0);
    double l2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double d = std::abs(W.P[i][j] - V.P[i][j]);
        l2 += W.masses[i] * W.masses[j] * d * d;
        if (d > delta) in_s[i] = in_s[j] = 1;
      }
    }
    double mass = 0.0;
    for (std::size_t i = 0; i < k; ++i) mass += in_s[i] ? W.masses[i] : 0.0;
    const auto b = stability_bound(eps, delta, mass, std::sqrt(l2), k);
    CHECK(std::abs(phi(W) - phi(V)) <= b.bound_a + 1e-12);
    CHECK(std::abs(phi_star(W, fast()).value - phi_star(V, fast()).value) <= b.bound_c + 1e-4);
  }
}

TEST_CASE("perturbation toward 1 shifts every corner ratio by the same amount") {
  auto e = rng::make_engine(44, rng::Stream::kInstances, 0);
  for (int t = 0; t < 30; ++t) {
    const std::size_t k = 1 + rng::below(e, 4);
    const auto W = random_block(e, k);
    const double ep = 0.5 * rng::u01(e);
    auto V = W;
    for (auto& row : V.P) {
      for (auto& p : row) p = (1 - ep) * p + ep;
    }
    const double c = -std::log1p(-ep);
    const QMatrix Q = q_of(W);
    const QMatrix Qp = q_of(V);
    Vec z(k);
    for (auto& v : z) v = rng::u01(e);
    CHECK(rayleigh_ratio(z, Qp) == doctest::Approx(rayleigh_ratio(z, Q) + c * norm1(z)).epsilon(1e-10));
    const BlockMeasure mu{W.masses};
    CHECK(phi_mu(mu, V) >= c - 1e-12);
    CHECK(phi_mu(mu, V) <= phi_mu(mu, W) + c + 1e-12);
  }
}

TEST_CASE("sandwich and monotone coupling") {
  auto e = rng::make_engine(45, rng::Stream::kInstances, 0);
  for (int t = 0; t < 15; ++t) {
    const std::size_t k = 1 + rng::below(e, 3);
    const auto W = random_block(e, k);
    const double lo = -std::log1p(-W.min_p());
    const double hi = -std::log1p(-W.max_p());
    const double s = phi_star(W, fast()).value;
    CHECK(lo <= s + 1e-12);
    CHECK(s <= phi(W) + 1e-12);
    CHECK(phi(W) <= hi + 1e-12);
    auto V = W;
    for (auto& row : V.P) {
      for (auto& p : row) p += (0.95 - p) * 0.3;
    }
    CHECK(phi(W) <= phi(V) + 1e-12);
    CHECK(s <= phi_star(V, fast()).value + 1e-6);
  }
}

TEST_CASE("chi prediction") {
  CHECK(chi_prediction_from_coefficient(4.0, std::exp(2.0)) == doctest::Approx(std::exp(2.0)));
  const double p = 0.5;
  const std::size_t n = 1000;
  CHECK(chi_prediction(BlockGraphon::constant(p), n, fast()) ==
        doctest::Approx(-std::log1p(-p) * n / (2 * std::log(static_cast<double>(n)))));
  CHECK_THROWS_AS(chi_prediction(BlockGraphon::constant(p), 2), std::invalid_argument);
}

TEST_CASE("decomposition from a system") {
  VectorSystem s;
  s.vectors = {{0.2, 0.1}, {0.0, 0.0}, {0.3, 0.4}};
  const auto d = decomposition_from_system(s);
  REQUIRE(d.parts.size() == 2);
  CHECK(d.parts[0].alpha == doctest::Approx(0.3));
  CHECK(d.parts[1].measure.weights[1] == doctest::Approx(4.0 / 7));
  CHECK_NOTHROW(d.validate({0.5, 0.5}));
}
