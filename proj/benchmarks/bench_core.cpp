#include <benchmark/benchmark.h>

#include <random>

#include "ytm/equivalence.hpp"
#include "ytm/tangent.hpp"

namespace {

using namespace ytm;

YTransitionModel random_model(int d, int dY, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  YTransitionModel m;
  m.d = d;
  m.dY = dY;
  m.W.assign(static_cast<std::size_t>(dY), Matrix::Zero(d, d));
  for (int xp = 0; xp < d; ++xp) {
    double colsum = 0.0;
    for (int y = 0; y < dY; ++y)
      for (int x = 0; x < d; ++x) {
        double v = 0.05 + uniform();
        m.W[static_cast<std::size_t>(y)](x, xp) = v;
        colsum += v;
      }
    for (int y = 0; y < dY; ++y) m.W[static_cast<std::size_t>(y)].col(xp) /= colsum;
  }
  return m;
}

void BM_perron(benchmark::State& state) {
  auto m = random_model(static_cast<int>(state.range(0)), 2, 7);
  Matrix bar = m.bar();
  for (auto _ : state) benchmark::DoNotOptimize(perron(bar));
}
BENCHMARK(BM_perron)->Arg(2)->Arg(4)->Arg(8);

void BM_pk_map(benchmark::State& state) {
  auto m = random_model(3, 2, 11);
  int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pk_map(m, k));
}
BENCHMARK(BM_pk_map)->Arg(4)->Arg(8)->Arg(12);

void BM_tangent_report(benchmark::State& state) {
  auto m = random_model(static_cast<int>(state.range(0)),
                        static_cast<int>(state.range(1)), 13);
  for (auto _ : state) benchmark::DoNotOptimize(tangent_report(m));
}
BENCHMARK(BM_tangent_report)->Args({2, 2})->Args({3, 3})->Args({4, 3});

void BM_are_equivalent(benchmark::State& state) {
  auto m = random_model(static_cast<int>(state.range(0)), 2, 17);
  Vector p = stationary(m);
  auto [big, pbig] = duplicate_state(m, p, 0, 0.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(are_equivalent(m, p, big, pbig));
}
BENCHMARK(BM_are_equivalent)->Arg(2)->Arg(3)->Arg(4);

void BM_build_generators(benchmark::State& state) {
  auto m = random_model(static_cast<int>(state.range(0)), 2, 19);
  Vector p = stationary(m);
  for (auto _ : state) benchmark::DoNotOptimize(build_generators(m, p));
}
BENCHMARK(BM_build_generators)->Arg(2)->Arg(3);

}  // namespace

BENCHMARK_MAIN();
