#include <benchmark/benchmark.h>

#include "roughkit/control_lab.hpp"
#include "roughkit/filtering.hpp"
#include "roughkit/rough_path.hpp"

using namespace roughkit;

namespace {

LinearGaussianModel scalar_model() {
  return LinearGaussianModel::constant(
      ModelCoefficients{Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 2.0),
                        Matrix::Constant(1, 1, 0.3)},
      Vector::Constant(1, 0.2), Matrix::Constant(1, 1, 0.5), 1.0);
}

}  // namespace

static void BM_KalmanBucy(benchmark::State& state) {
  LinearGaussianModel model = scalar_model();
  SimulatedPair pair = simulate_pair(model, 3, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kalman_bucy(model, pair.observation));
}
BENCHMARK(BM_KalmanBucy)->Arg(1024)->Arg(8192);

static void BM_Penalty(benchmark::State& state) {
  LinearGaussianModel model = scalar_model();
  SimulatedPair pair = simulate_pair(model, 3, 1024);
  PenaltyConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(penalty(model, pair.observation, cfg));
}
BENCHMARK(BM_Penalty);

static void BM_LatticeValue(benchmark::State& state) {
  DeskInstance d = desk_instance("lq", 1, 64);
  d.grid.n_knots = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(value(d.problem, 0.0, d.x0, d.a0, d.grid));
}
BENCHMARK(BM_LatticeValue)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_TradingValue(benchmark::State& state) {
  SampledPath eta = brownian_path(7, static_cast<std::size_t>(state.range(0)), 1.0, 1);
  TradingConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(trading_value(eta, 0.1, cfg));
}
BENCHMARK(BM_TradingValue)->Arg(128)->Arg(1024)->Unit(benchmark::kMillisecond);
