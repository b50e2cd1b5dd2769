#include <benchmark/benchmark.h>

#include "hdlda/linalg.hpp"
#include "hdlda/normal.hpp"
#include "hdlda/rng.hpp"

using namespace hdlda;

namespace {

Mat spd(int p) {
  RngStream rng = rng_stream(2, 0);
  Mat b(p, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < p; ++i) b(i, j) = rng.normal();
  Mat a = b * b.transpose() / p + Mat::Identity(p, p);
  symmetrize_from_lower(a);
  return a;
}

}  // namespace

static void BM_Cholesky(benchmark::State& state) {
  const Mat a = spd(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cholesky(a));
}
BENCHMARK(BM_Cholesky)->Arg(100)->Arg(300);

static void BM_Pinv(benchmark::State& state) {
  const Mat a = spd(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pinv(a));
}
BENCHMARK(BM_Pinv)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_BvnLowerCdf(benchmark::State& state) {
  const double rho = static_cast<double>(state.range(0)) / 100.0;
  double h = -1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bvn_lower_cdf(h, 0.3, rho));
    h = h > 1.0 ? -1.0 : h + 1e-3;
  }
}
BENCHMARK(BM_BvnLowerCdf)->Arg(30)->Arg(95);

static void BM_Normals(benchmark::State& state) {
  RngStream rng = rng_stream(3, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
}
BENCHMARK(BM_Normals);
BENCHMARK_MAIN();
