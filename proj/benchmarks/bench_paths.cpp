#include <benchmark/benchmark.h>

#include "roughkit/rde.hpp"
#include "roughkit/rough_path.hpp"

using namespace roughkit;

static void BM_PVariation(benchmark::State& state) {
  auto n = static_cast<std::size_t>(state.range(0));
  SampledPath path = brownian_path(3, n, 1.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(p_variation(path, 2.5));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PVariation)->RangeMultiplier(4)->Range(64, 1024)->Complexity();

static void BM_ChenDefect(benchmark::State& state) {
  RoughPath rp = brownian_rough_path(5, static_cast<std::size_t>(state.range(0)), 1.0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(rp.chen_defect());
}
BENCHMARK(BM_ChenDefect)->Arg(32)->Arg(64);

static void BM_RoughIntegral(benchmark::State& state) {
  auto rp = std::make_shared<const RoughPath>(brownian_rough_path(7, static_cast<std::size_t>(state.range(0)), 1.0, 2));
  RdeCoefficients coeffs;
  coeffs.lam = [](const Vector& x, const Vector&) {
    Matrix m(2, 2);
    m << x[1], 0.1, -x[0], 0.2;
    return m;
  };
  coeffs.dlam = [](const Vector&, const Vector&) {
    Matrix d0 = Matrix::Zero(2, 2);
    Matrix d1 = Matrix::Zero(2, 2);
    d0(1, 0) = -1.0;
    d1(0, 0) = 1.0;
    return std::vector<Matrix>{d0, d1};
  };
  SampledPath gamma(std::vector<double>(rp->base().times().begin(), rp->base().times().end()),
                    std::vector<Vector>(rp->size(), Vector::Zero(1)));
  Vector x0(2);
  x0 << 1.0, 0.0;
  for (auto _ : state) {
    ControlledPath x = solve_rde(coeffs, gamma, rp, x0);
    benchmark::DoNotOptimize(rough_integral(x, *rp, 0.0, 1.0));
  }
}
BENCHMARK(BM_RoughIntegral)->Arg(256)->Arg(1024)->Arg(4096);
