#include <benchmark/benchmark.h>

#include "builders.hpp"
#include "collabnet/community.hpp"
#include "collabnet/solution_space.hpp"

using namespace collabnet;

namespace {

CollabGraph ring(int cliques) { return testing::make_graph(cliques * 6, testing::ring_of_cliques(cliques, 6, 0.5)); }

void BM_Detect(benchmark::State& state, Algorithm algorithm) {
  const auto g = ring(static_cast<int>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(detect(g, algorithm, {}, seed++));
}
BENCHMARK_CAPTURE(BM_Detect, louvain, Algorithm::Louvain)->Arg(16)->Arg(128);
BENCHMARK_CAPTURE(BM_Detect, label_propagation, Algorithm::LabelPropagation)->Arg(16)->Arg(128);
BENCHMARK_CAPTURE(BM_Detect, walktrap, Algorithm::Walktrap)->Arg(16)->Arg(64);

void BM_Explore(benchmark::State& state) {
  const auto g = ring(32);
  ExplorationConfig config;
  config.tMax = 100;
  config.workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(explore(g, Algorithm::Louvain, {}, config, 1));
}
BENCHMARK(BM_Explore)->Arg(1)->Arg(4)->UseRealTime();

void BM_Consensus(benchmark::State& state) {
  Rng rng(3);
  const auto g = testing::make_graph(120, testing::random_edges(rng, 120, 0.06));
  ExplorationConfig config;
  config.tMax = 60;
  const auto space = explore(g, Algorithm::LabelPropagation, {}, config, 1);
  for (auto _ : state) benchmark::DoNotOptimize(consensus(space, g));
}
BENCHMARK(BM_Consensus);

}  // namespace
