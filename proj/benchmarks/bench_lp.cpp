#include <benchmark/benchmark.h>
#include <cmath>

#include "hdlda/lp.hpp"
#include "hdlda/rng.hpp"

using namespace hdlda;

static void BM_L1LinfDense(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  RngStream rng = rng_stream(1, 0);
  Mat a(p, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < p; ++i) a(i, j) = 0.5 * std::pow(0.5, std::abs(i - j)) + (i == j ? 0.5 : 0.0);
  Vec d(p);
  for (int i = 0; i < p; ++i) d(i) = i < 5 ? 1.0 : 0.1 * rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(solve_l1_linf(a, d, 0.3));
}
BENCHMARK(BM_L1LinfDense)->Arg(50)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);
