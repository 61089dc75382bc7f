#include <fmt/format.h>

#include <algorithm>
#include <vector>

#include "collabnet/community.hpp"
#include "collabnet/error.hpp"
#include "collabnet/rng.hpp"

namespace collabnet::detail {

namespace {

constexpr double kTieTolerance = 1e-12;

bool ties(double a, double best) { return a >= best - kTieTolerance * best; }

}  // namespace

// Asynchronous weighted label propagation. Nodes are updated in storage order;
// among labels of maximal neighbour weight one is drawn uniformly with the
// trial seed. Stops once every node carries one of its maximal labels.
std::vector<int> label_propagation(const CollabGraph& graph, const DetectParams& params,
                                   std::uint64_t seed, DetectTrace* trace) {
  const auto n = graph.node_count();
  std::vector<int> label(n);
  for (std::size_t v = 0; v < n; ++v) label[v] = static_cast<int>(v);

  Rng rng(seed);
  std::vector<double> score(n, 0.0);
  std::vector<int> touched, best;

  auto dominant = [&](NodeIndex v) {
    touched.clear();
    for (const auto& nb : graph.neighbors(v)) {
      const int l = label[nb.node];
      if (score[static_cast<std::size_t>(l)] == 0.0) touched.push_back(l);
      score[static_cast<std::size_t>(l)] += nb.weight;
    }
    double top = 0.0;
    for (int l : touched) top = std::max(top, score[static_cast<std::size_t>(l)]);
    best.clear();
    for (int l : touched)
      if (ties(score[static_cast<std::size_t>(l)], top)) best.push_back(l);
    for (int l : touched) score[static_cast<std::size_t>(l)] = 0.0;
  };

  for (int sweep = 1; sweep <= params.maxSweeps; ++sweep) {
    for (NodeIndex v = 0; v < n; ++v) {
      if (graph.degree(v) == 0) continue;
      dominant(v);
      label[v] = best.size() == 1 ? best.front()
                                  : best[static_cast<std::size_t>(rng.below(best.size()))];
    }

    bool settled = true;
    for (NodeIndex v = 0; v < n && settled; ++v) {
      if (graph.degree(v) == 0) continue;
      dominant(v);
      settled = std::find(best.begin(), best.end(), label[v]) != best.end();
    }
    if (settled) {
      if (trace) trace->sweeps = sweep;
      return label;
    }
  }
  throw Error(ErrorKind::Nonconvergence,
              fmt::format("label propagation did not settle within {} sweeps (year {}, seed {})",
                          params.maxSweeps, graph.year(), seed));
}

}  // namespace collabnet::detail
