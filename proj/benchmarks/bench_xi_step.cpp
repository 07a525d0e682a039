// Micro benchmarks for the per-iteration building blocks: the posterior
// refresh and the coordinate-wise xi update that dominates large-n fits.

#include <benchmark/benchmark.h>

#include "tavie/bqr.hpp"
#include "tavie/data_bench.hpp"
#include "tavie/tavie_core.hpp"

namespace {

using namespace tavie;

VariationalState make_state(const Dataset& data) {
  const auto p = data.p();
  VariationalState state;
  state.family = SsgFamily::laplace();
  state.alpha = 1.0;
  state.prior = NormalGammaParams(Eigen::VectorXd::Zero(p),
                                  Eigen::MatrixXd::Identity(p, p), 0.025, 0.025);
  state.xi = Eigen::VectorXd::Ones(data.n());
  refresh_posterior(state, data);
  return state;
}

void BM_XiStep(benchmark::State& bm) {
  const auto n = static_cast<int>(bm.range(0));
  auto [data, truth] = simulate(SsgFamily::laplace(), n, 8, 1);
  VariationalState state = make_state(data);
  for (auto _ : bm) {
    Eigen::VectorXd xi = kappa(state, data).cwiseSqrt();
    benchmark::DoNotOptimize(xi.data());
  }
  bm.SetComplexityN(n);
}
BENCHMARK(BM_XiStep)->RangeMultiplier(10)->Range(1000, 100000)->Complexity();

void BM_PosteriorRefresh(benchmark::State& bm) {
  const auto n = static_cast<int>(bm.range(0));
  auto [data, truth] = simulate(SsgFamily::laplace(), n, 8, 1);
  VariationalState state = make_state(data);
  for (auto _ : bm) {
    refresh_posterior(state, data);
    benchmark::DoNotOptimize(state.posterior);
  }
  bm.SetComplexityN(n);
}
BENCHMARK(BM_PosteriorRefresh)->RangeMultiplier(10)->Range(1000, 100000)->Complexity();

void BM_QuantileIteration(benchmark::State& bm) {
  const auto n = static_cast<int>(bm.range(0));
  auto [data, truth] = simulate(SsgFamily::ald(0.7), n, 8, 2, {1.0, 1.0, 1.0, 0.7});
  const GaussianParams prior(Eigen::VectorXd::Zero(8),
                             Eigen::MatrixXd::Identity(8, 8));
  VariationalState state;
  state.family = SsgFamily::ald(0.7);
  state.tau0 = 1.0;
  state.prior = prior;
  state.xi = Eigen::VectorXd::Ones(n);
  refresh_posterior(state, data);
  for (auto _ : bm) {
    refresh_posterior(state, data);
    state.xi = kappa(state, data).cwiseSqrt().cwiseMax(kXiFloor);
    benchmark::DoNotOptimize(state.xi.data());
  }
  bm.SetComplexityN(n);
}
BENCHMARK(BM_QuantileIteration)->RangeMultiplier(10)->Range(1000, 100000)->Complexity();

}  // namespace

BENCHMARK_MAIN();
