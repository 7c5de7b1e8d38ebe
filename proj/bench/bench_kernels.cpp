// Parallel kernels against the serial reference at the network's shapes.

#include <benchmark/benchmark.h>

#include <random>

#include "f0reg/kernels.hpp"

namespace {

f0reg::Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  f0reg::Matrix m(r, c);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (auto& v : m.flat()) v = g(rng);
  return m;
}

template <void (*Gemm)(const f0reg::Matrix&, const f0reg::Matrix&, f0reg::Matrix&, bool)>
void BM_Gemm(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto n = static_cast<std::size_t>(state.range(2));
  const auto a = random_matrix(m, k, 1), b = random_matrix(k, n, 2);
  f0reg::Matrix c(m, n);
  for (auto _ : state) {
    Gemm(a, b, c, false);
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["GFLOP/s"] = benchmark::Counter(2e-9 * static_cast<double>(m * k * n),
                                                 benchmark::Counter::kIsIterationInvariantRate);
}

void shapes(benchmark::internal::Benchmark* b) {
  // Batch 1024 through the 768-256-256-256-2 network, forward and backward.
  b->Args({1024, 768, 256})->Args({1024, 256, 256})->Args({256, 1024, 256})->Args({1024, 256, 2});
  b->Unit(benchmark::kMillisecond);
}

void BM_Transpose(benchmark::State& state, bool reference) {
  const auto a = random_matrix(1024, 768, 3);
  f0reg::Matrix t(768, 1024);
  for (auto _ : state) {
    if (reference)
      f0reg::kernels::reference::transpose(a, t);
    else
      f0reg::kernels::transpose(a, t);
    benchmark::DoNotOptimize(t.data());
  }
}

}  // namespace

BENCHMARK(BM_Gemm<f0reg::kernels::gemm>)->Name("gemm/parallel")->Apply(shapes);
BENCHMARK(BM_Gemm<f0reg::kernels::reference::gemm>)->Name("gemm/reference")->Apply(shapes);
BENCHMARK_CAPTURE(BM_Transpose, parallel, false);
BENCHMARK_CAPTURE(BM_Transpose, reference, true);

BENCHMARK_MAIN();
