#include <benchmark/benchmark.h>
#include <string>

#include "hdlda/classifiers.hpp"
#include "hdlda/population.hpp"

using namespace hdlda;

static void BM_Fit(benchmark::State& state) {
  const auto method = static_cast<Method>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  const PopulationModel truth = make_sim_model(1, 300, k);
  RngStream rng = rng_stream(4, 0);
  const LabeledSample train = sample_dataset(truth, 150, rng);
  FitParams params;
  params.lambda = 0.5;
  params.m1 = 0.1;
  params.m2 = 0.01;
  params.epsilon = 1e-3;
  params.delta = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(fit(method, train, params));
  state.SetLabel(std::string(method_name(method)));
}
BENCHMARK(BM_Fit)
    ->Args({static_cast<int>(Method::Glda), 3})
    ->Args({static_cast<int>(Method::Slda2), 3})
    ->Args({static_cast<int>(Method::Lpd), 3})
    ->Args({static_cast<int>(Method::Lpd), 5})
    ->Args({static_cast<int>(Method::Nsc), 3})
    ->Unit(benchmark::kMillisecond);
