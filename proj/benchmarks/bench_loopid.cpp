#include <benchmark/benchmark.h>

#include "loopid/estimation/least_squares.hpp"
#include "loopid/estimation/projected_gradient.hpp"
#include "loopid/estimation/tabular_fit.hpp"
#include "loopid/linsys/closed_loop.hpp"
#include "loopid/markov/chain.hpp"
#include "loopid/models/gaussian_predictor.hpp"

namespace {

using namespace loopid;

LinearClosedLoopSystem arx_loop() {
  LinearClosedLoopSystem sys;
  sys.plant = RationalFilter({0.0, 1.0}, {1.0, -0.5});
  sys.noise = RationalFilter({1.0}, {1.0, -0.5});
  sys.controller = RationalFilter::gain(0.2);
  sys.sigma_e = 0.1;
  sys.sigma_r = 1.0;
  return sys;
}

LinearClosedLoopSystem armax_loop() {
  LinearClosedLoopSystem sys;
  sys.plant = RationalFilter::fir(ShiftPolynomial{0.0, 1.0});
  sys.noise = RationalFilter::fir(ShiftPolynomial{1.0, 0.5});
  sys.controller = RationalFilter::gain(0.2);
  sys.sigma_e = 1.0;
  sys.sigma_r = 1.0;
  return sys;
}

ControlledMarkovChain chain() {
  return ControlledMarkovChain(3, 2,
                               {0.7, 0.2, 0.1, 0.1, 0.6, 0.3, 0.3, 0.5, 0.2, 0.2, 0.2, 0.6, 0.5,
                                0.3, 0.2, 0.1, 0.4, 0.5},
                               {0.6, 0.4, 0.5, 0.5, 0.3, 0.7});
}

void BM_SimulateLinear(benchmark::State& state) {
  const auto sys = arx_loop();
  const auto T = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_linear_closed_loop(sys, T, make_rng(1, 0), 100));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateLinear)->Arg(1000)->Arg(100000);

void BM_SimulateMarkov(benchmark::State& state) {
  const auto c = chain();
  const auto T = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_cmc(c, T, make_rng(1, 0), StationaryStart{}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateMarkov)->Arg(1000)->Arg(100000);

void BM_AvgLoglikArmax(benchmark::State& state) {
  const auto traj = simulate_linear_closed_loop(armax_loop(), state.range(0), make_rng(2, 0), 100);
  const auto model = GaussianPredictorModel::armax(0, 1, 1, 1.0);
  const std::vector<double> theta{1.0, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(avg_loglik(model, theta, traj));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AvgLoglikArmax)->Arg(10000)->Arg(100000);

void BM_LeastSquares(benchmark::State& state) {
  const auto traj = simulate_linear_closed_loop(arx_loop(), state.range(0), make_rng(3, 0), 100);
  const Box box({{-1.0, 1.0}, {0.0, 2.0}});
  for (auto _ : state) benchmark::DoNotOptimize(fit_arx_least_squares(traj, 1, 1, 0.1, box));
}
BENCHMARK(BM_LeastSquares)->Arg(10000)->Arg(100000);

void BM_ProjectedGradient(benchmark::State& state) {
  const auto traj = simulate_linear_closed_loop(armax_loop(), state.range(0), make_rng(4, 0), 100);
  const auto model = GaussianPredictorModel::armax(0, 1, 1, 1.0);
  const ParameterVector start({1.0, 0.0}, Box({{0.0, 2.0}, {-0.9, 0.9}}));
  for (auto _ : state) benchmark::DoNotOptimize(fit_projected_gradient(model, traj, start));
}
BENCHMARK(BM_ProjectedGradient)->Arg(2000)->Arg(20000);

void BM_TabularFit(benchmark::State& state) {
  const auto traj = simulate_cmc(chain(), state.range(0), make_rng(5, 0), StationaryStart{});
  for (auto _ : state) benchmark::DoNotOptimize(fit_tabular(traj, 3, 2, 1e-4));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TabularFit)->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
