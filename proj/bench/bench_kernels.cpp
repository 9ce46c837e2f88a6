// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <cmath>

#include "gchroma/kernels.hpp"
#include "gchroma/rng.hpp"
#include "gchroma/sampler.hpp"

namespace {

using namespace gchroma;

struct Instance {
  Vec x;
  QMatrix Q;
  std::vector<int> active;
};

Instance make_instance(std::size_t k) {
  auto eng = rng::make_engine(42, rng::Stream::kInstances, k);
  std::vector<double> q(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) q[i * k + j] = q[j * k + i] = -std::log1p(-0.9 * rng::u01(eng));
  }
  Instance in{Vec(k), QMatrix(k, q), {}};
  for (std::size_t i = 0; i < k; ++i) {
    in.x[i] = 0.1 + rng::u01(eng);
    in.active.push_back(static_cast<int>(i));
  }
  return in;
}

void BM_CornerSerial(benchmark::State& st) {
  const auto in = make_instance(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::corner_max(in.x, in.Q, in.active));
}

void BM_CornerParallel(benchmark::State& st) {
  const auto in = make_instance(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::corner_max(in.x, in.Q, in.active));
}

std::vector<int> blocks_for(std::size_t n) {
  std::vector<int> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<int>(3 * i / n);
  return b;
}

const std::vector<Vec> kP = {{0.5, 0.5, 0.75}, {0.5, 0.75, 0.5}, {0.75, 0.5, 0.875}};

void BM_EdgesSerial(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto blocks = blocks_for(n);
  for (auto _ : st) {
    BitMatrix adj(n);
    kernels::serial::sample_edges(adj, blocks, kP, 7);
    benchmark::DoNotOptimize(adj);
  }
}

void BM_EdgesParallel(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto blocks = blocks_for(n);
  for (auto _ : st) {
    BitMatrix adj(n);
    kernels::sample_edges(adj, blocks, kP, 7);
    benchmark::DoNotOptimize(adj);
  }
}

std::vector<Vec> lattice(std::size_t k, int N) {
  std::vector<Vec> pts;
  auto eng = rng::make_engine(3, rng::Stream::kInstances, 0);
  for (int p = 0; p < N; ++p) {
    Vec v(k);
    double s = 0.0;
    for (auto& c : v) s += (c = rng::exp1(eng));
    for (auto& c : v) c /= s;
    pts.push_back(std::move(v));
  }
  return pts;
}

void BM_LatticeSerial(benchmark::State& st) {
  const auto in = make_instance(6);
  const auto pts = lattice(6, static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::lattice_values(pts, in.Q));
}

void BM_LatticeParallel(benchmark::State& st) {
  const auto in = make_instance(6);
  const auto pts = lattice(6, static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::lattice_values(pts, in.Q));
}

}  // namespace

BENCHMARK(BM_CornerSerial)->Arg(8)->Arg(12)->Arg(16);
BENCHMARK(BM_CornerParallel)->Arg(8)->Arg(12)->Arg(16)->Arg(20);
BENCHMARK(BM_EdgesSerial)->Arg(1000)->Arg(4000);
BENCHMARK(BM_EdgesParallel)->Arg(1000)->Arg(4000);
BENCHMARK(BM_LatticeSerial)->Arg(10000);
BENCHMARK(BM_LatticeParallel)->Arg(10000);

BENCHMARK_MAIN();
