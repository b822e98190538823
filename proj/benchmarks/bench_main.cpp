#include <random>

#include <benchmark/benchmark.h>

#include "lavlev/fixtures.hpp"
#include "lavlev/lav.hpp"
#include "lavlev/leverage.hpp"
#include "lavlev/power.hpp"

using namespace lavlev;

namespace {

MeasurementModel random_model(Index m, Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix h(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k < n; ++k) h(i, k) = g(rng);
  Vector z(m);
  for (Index i = 0; i < m; ++i) z(i) = g(rng);
  return make_model(h, z);
}

void BM_DetectThreeBus(benchmark::State& state) {
  const auto m = build_dc_model(fixtures::threebus_dc());
  DetectOptions opt;
  opt.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(detect_all(m, opt));
}
BENCHMARK(BM_DetectThreeBus);

void BM_DetectRandom(benchmark::State& state) {
  const Index n = state.range(0);
  const auto m = random_model(3 * n, n, 1);
  DetectOptions opt;
  opt.threads = 1;
  opt.exhaustive = true;
  for (auto _ : state) benchmark::DoNotOptimize(detect_all(m, opt));
}
BENCHMARK(BM_DetectRandom)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

void BM_SolveLav(benchmark::State& state) {
  const Index n = state.range(0);
  const auto m = random_model(4 * n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lav(m));
}
BENCHMARK(BM_SolveLav)->RangeMultiplier(2)->Range(2, 32);

void BM_SolveLavIeee14(benchmark::State& state) {
  auto m = build_dc_model(fixtures::ieee14_dc());
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.01);
  for (Index i = 0; i < m.rows(); ++i) m.z(i) = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lav(m));
}
BENCHMARK(BM_SolveLavIeee14);

}  // namespace

BENCHMARK_MAIN();
