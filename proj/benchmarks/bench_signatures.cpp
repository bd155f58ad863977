#include <benchmark/benchmark.h>

#include "roughkit/rough_path.hpp"
#include "roughkit/signatures.hpp"
#include "roughkit/stopping.hpp"

using namespace roughkit;

static void BM_Signature(benchmark::State& state) {
  SampledPath path = brownian_path(11, 256, 1.0, 2);
  auto level = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(signature(path, level));
}
BENCHMARK(BM_Signature)->DenseRange(2, 6, 2);

static void BM_ShuffleExp(benchmark::State& state) {
  LinearFunctional l = LinearFunctional::parse("0.5*1 + -1*2 + 0.25*12");
  auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(exp_shuffle(l, n));
}
BENCHMARK(BM_ShuffleExp)->Arg(2)->Arg(3)->Arg(4);

static void BM_ConditionalValue(benchmark::State& state) {
  GeometricBrownianModel model(1.0, 0.06, 0.2, 1.0);
  SampledPath path = model.sample(1, 256);
  StoppingPolicy policy{LinearFunctional::parse("1*e + -2*2 + 0.5*12"), 4};
  PayoffSpec payoff{PayoffKind::american_put, 1.0, 0.06, {}};
  for (auto _ : state) benchmark::DoNotOptimize(conditional_value(policy, path, payoff));
}
BENCHMARK(BM_ConditionalValue);
