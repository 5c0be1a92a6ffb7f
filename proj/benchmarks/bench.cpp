#include <benchmark/benchmark.h>

#include <vector>

#include "binshrink/infer.hpp"
#include "binshrink/rng.hpp"
#include "binshrink/shrink.hpp"
#include "binshrink/stein.hpp"
#include "binshrink/sure.hpp"
#include "binshrink/thin.hpp"

namespace {

using namespace binshrink;

OneSampleDataset sample_dataset(int n_units, int trials, int dim) {
  SyntheticDesign sd;
  sd.n_units = n_units;
  sd.trials_min = trials;
  sd.trials_max = trials;
  sd.covariate_dim = dim;
  sd.g_intercept = 0.4;
  if (dim > 0) sd.g_slope = {0.1};
  sd.noise_sd = 0.05;
  return simulate_one(sd, RngSeed{42}).data;
}

void BM_Transform(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  RngStream rng(RngSeed{1}, "bench-transform");
  OutcomeTable h;
  h.n = n;
  for (int y = 0; y <= n; ++y) h.values.push_back(rng.uniform());
  int y = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(t_op(h, y));
    y = (y + 1) % (n + 1);
  }
}
BENCHMARK(BM_Transform)->Arg(8)->Arg(32)->Arg(128)->Arg(1000);

void BM_RiskCoefficients(benchmark::State& state) {
  const int n_units = static_cast<int>(state.range(0));
  const OneSampleDataset d = sample_dataset(n_units, 12, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sure_one_coeffs(d, nullptr));
  state.SetItemsProcessed(state.iterations() * n_units);
}
BENCHMARK(BM_RiskCoefficients)->Arg(100)->Arg(1000)->Arg(10000);

void BM_RiskDirect(benchmark::State& state) {
  const int n_units = static_cast<int>(state.range(0));
  const OneSampleDataset d = sample_dataset(n_units, 12, 0);
  const Lambda lam{0.5, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(sure_one_direct(d, nullptr, lam));
  state.SetItemsProcessed(state.iterations() * n_units);
}
BENCHMARK(BM_RiskDirect)->Arg(100)->Arg(1000);

void BM_CrossFitOls(benchmark::State& state) {
  const int n_units = static_cast<int>(state.range(0));
  const OneSampleDataset d = sample_dataset(n_units, 12, 1);
  const FoldAssignment folds = assign_folds(n_units, 10, RngSeed{7});
  const auto predictor = make_ols_predictor();
  for (auto _ : state) benchmark::DoNotOptimize(cross_fit(d, *predictor, folds));
}
BENCHMARK(BM_CrossFitOls)->Arg(200)->Arg(2000);

void BM_ConstrainedFit(benchmark::State& state) {
  const OneSampleDataset d = sample_dataset(500, 12, 0);
  const QuadraticForm q = sure_one_coeffs(d, nullptr);
  for (auto _ : state) benchmark::DoNotOptimize(fit_lambda(q, true));
}
BENCHMARK(BM_ConstrainedFit);

void BM_Hypergeometric(benchmark::State& state) {
  RngStream rng(RngSeed{3}, "bench-hyper");
  for (auto _ : state) benchmark::DoNotOptimize(hypergeom_sample(4, 12, 7, rng));
}
BENCHMARK(BM_Hypergeometric);

void BM_Bootstrap(benchmark::State& state) {
  const int b = static_cast<int>(state.range(0));
  const OneSampleDataset d = sample_dataset(500, 10, 0);
  PredictorSpec spec;
  for (auto _ : state)
    benchmark::DoNotOptimize(bootstrap_one(d, spec, 10, b, RngSeed{11}));
  state.SetItemsProcessed(state.iterations() * b);
}
BENCHMARK(BM_Bootstrap)->Arg(100);

void BM_MembershipStatistic(benchmark::State& state) {
  const OneSampleDataset d = sample_dataset(500, 10, 0);
  const QuadraticForm q = sure_one_coeffs(d, nullptr);
  const Lambda lam_hat = fit_lambda(q, true);
  PredictorSpec spec;
  const BootstrapRun run = bootstrap_one(d, spec, 10, 100, RngSeed{13});
  GridSpec grid = default_grid(run, lam_hat);
  const GridRegion region = constrained_region(q, lam_hat, run, 0.05, 0.5, grid, 500);
  double probe = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(region.contains(Lambda{probe, 0.0}));
    probe = probe < 1.0 ? probe + 0.001 : 0.0;
  }
}
BENCHMARK(BM_MembershipStatistic);

}  // namespace

BENCHMARK_MAIN();
