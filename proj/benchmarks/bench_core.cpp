#include <benchmark/benchmark.h>

#include "fdsurvey/bands.hpp"
#include "fdsurvey/covariance.hpp"
#include "fdsurvey/linalg.hpp"
#include "fdsurvey/rng.hpp"
#include "fdsurvey/synthetic.hpp"

using namespace fdsurvey;

namespace {

FunctionalPopulation population(std::size_t units, std::size_t d) {
  const auto grid = TimeGrid::uniform(d, 1.0);
  auto cfg = desk_scale_config(grid, 0.95, 1);
  cfg.unit_scale_dispersion = 0.7;
  return generate_population(cfg, units, grid);
}

}  // namespace

static void BM_SymEigen(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto pop = population(500, d);
  const auto cov = ma_covariance_approx(pop, SamplingDesign::srswor(500, 50)).matrix;
  for (auto _ : state) benchmark::DoNotOptimize(sym_eigen(cov));
}
BENCHMARK(BM_SymEigen)->Arg(24)->Arg(48)->Arg(96);

static void BM_MaCovarianceEstimate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pop = population(2000, 48);
  const auto design = SamplingDesign::srswor(2000, n);
  RngStream rng(1, StreamPurpose::kGeneric, 0);
  const auto sample = design.draw(rng);
  for (auto _ : state) benchmark::DoNotOptimize(ma_covariance_estimate(pop, sample, std::nullopt));
}
BENCHMARK(BM_MaCovarianceEstimate)->Arg(50)->Arg(200)->Arg(800);

static void BM_HtCovarianceExact(benchmark::State& state) {
  const auto units = static_cast<std::size_t>(state.range(0));
  const auto pop = population(units, 48);
  const auto design = SamplingDesign::srswor(units, units / 10);
  for (auto _ : state) benchmark::DoNotOptimize(ht_covariance_exact(pop, design));
}
BENCHMARK(BM_HtCovarianceExact)->Arg(500)->Arg(2000);

static void BM_SimulateSupQuantile(benchmark::State& state) {
  const auto sims = static_cast<std::size_t>(state.range(0));
  const auto pop = population(500, 48);
  const auto cov = ma_covariance_approx(pop, SamplingDesign::srswor(500, 50)).matrix.scaled(50.0);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_sup_quantile(cov, 0.05, sims, 7));
}
BENCHMARK(BM_SimulateSupQuantile)->Arg(1000)->Arg(10000);

BENCHMARK_MAIN();
