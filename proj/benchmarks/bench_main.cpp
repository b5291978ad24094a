#include <random>

#include <benchmark/benchmark.h>

#include "mdm/fluctuations.hpp"
#include "mdm/gaussian.hpp"
#include "mdm/matching_polynomial.hpp"
#include "mdm/partition.hpp"
#include "mdm/quenched.hpp"

namespace {

mdm::MDModel dense_model(int n) {
  std::mt19937_64 rng(n);
  std::bernoulli_distribution coin(0.5);
  std::vector<mdm::Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) edges.push_back({i, j});
  mdm::Graph g(n, edges);
  return mdm::MDModel::uniform(g, 0.7, 1.3);
}

void BM_PartitionEnum(benchmark::State& state) {
  const auto m = dense_model(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mdm::log_partition_enum(m));
}
BENCHMARK(BM_PartitionEnum)->DenseRange(8, 14, 2);

void BM_PartitionHl(benchmark::State& state) {
  const auto m = dense_model(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mdm::log_partition_hl(m));
}
BENCHMARK(BM_PartitionHl)->DenseRange(8, 20, 4);

void BM_GaussianExact(benchmark::State& state) {
  const auto m = dense_model(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mdm::log_gaussian_partition_exact(m));
}
BENCHMARK(BM_GaussianExact)->DenseRange(8, 14, 2);

void BM_GaussianMc(benchmark::State& state) {
  const auto m = dense_model(10);
  const mdm::McOptions o{static_cast<std::uint64_t>(state.range(0)), 1};
  for (auto _ : state) benchmark::DoNotOptimize(mdm::gaussian_partition_mc(m, o));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GaussianMc)->Arg(1 << 14)->Arg(1 << 17);

void BM_PolynomialRoots(benchmark::State& state) {
  const auto m = dense_model(static_cast<int>(state.range(0)));
  const auto p = mdm::polynomial_coeffs(m.graph(), m.dimer_weights());
  for (auto _ : state) benchmark::DoNotOptimize(mdm::polynomial_roots(p));
}
BENCHMARK(BM_PolynomialRoots)->Arg(10)->Arg(20);

void BM_ExactPmf(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(mdm::exact_pmf(state.range(0), -0.34, 1.46));
}
BENCHMARK(BM_ExactPmf)->Arg(10000)->Arg(1000000);

void BM_PopulationStep(benchmark::State& state) {
  const mdm::Population pop(static_cast<std::size_t>(state.range(0)), 0.5);
  const mdm::ERParams params(2.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(mdm::population_step(pop, params, mdm::PopulationOptions{1}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PopulationStep)->Arg(10000)->Arg(100000);

void BM_RfQuadrature(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> ln(0.0, 0.5);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = ln(rng);
  for (auto _ : state) benchmark::DoNotOptimize(mdm::rf_partition_quadrature(1.0, x));
}
BENCHMARK(BM_RfQuadrature)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
