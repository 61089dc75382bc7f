#include <benchmark/benchmark.h>

#include "builders.hpp"
#include "collabnet/centrality.hpp"
#include "collabnet/graph.hpp"

using namespace collabnet;

namespace {

// A year of synthetic participation: projects of 2..12 partners drawn from `orgs`.
WeightMatrix synthetic_year(int projects, int orgs) {
  Rng rng(1);
  WeightMatrix m;
  m.year = 2020;
  for (int p = 0; p < projects; ++p) {
    const int n = 2 + static_cast<int>(rng.below(11));
    for (int k = 0; k < n; ++k)
      m.entries[{testing::org(static_cast<int>(rng.below(static_cast<std::uint64_t>(orgs)))),
                 "P" + std::to_string(p)}] = 10.0 + 500.0 * rng.uniform();
  }
  return m;
}

void BM_Projection(benchmark::State& state) {
  const auto m = synthetic_year(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)) * 2);
  for (auto _ : state) benchmark::DoNotOptimize(project_one_mode(m));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m.entries.size()));
}
BENCHMARK(BM_Projection)->Arg(100)->Arg(1000)->Arg(5000);

void BM_Coreness(benchmark::State& state) {
  Rng rng(2);
  const int n = static_cast<int>(state.range(0));
  const auto g = testing::make_graph(n, testing::random_edges(rng, n, 8.0 / n));
  for (auto _ : state) benchmark::DoNotOptimize(core_numbers(g));
}
BENCHMARK(BM_Coreness)->Arg(1000)->Arg(10000);

void BM_CentralityTable(benchmark::State& state) {
  const auto g = project_one_mode(synthetic_year(2000, 4000));
  for (auto _ : state) benchmark::DoNotOptimize(centrality_table(std::span(&g, 1)));
}
BENCHMARK(BM_CentralityTable);

}  // namespace
