#include <map>
#include <vector>

#include "collabnet/community.hpp"

namespace collabnet::detail {

namespace {

// Weighted graph with self-loops, used for the aggregated levels.
struct LevelGraph {
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> targets;
  std::vector<double> weights;
  std::vector<double> loops;   // self-loop weight, counted once
  std::vector<double> degree;  // adjacency sum + 2 * loop

  std::size_t size() const { return loops.size(); }
};

LevelGraph from_collab(const CollabGraph& g) {
  LevelGraph level;
  const auto n = g.node_count();
  level.loops.assign(n, 0.0);
  level.degree.assign(n, 0.0);
  for (NodeIndex v = 0; v < n; ++v) {
    for (const auto& nb : g.neighbors(v)) {
      level.targets.push_back(nb.node);
      level.weights.push_back(nb.weight);
    }
    level.offsets.push_back(level.targets.size());
    level.degree[v] = g.strength(v);
  }
  return level;
}

// Local moving phase. Returns true when any node changed community.
bool move_nodes(const LevelGraph& g, std::vector<std::uint32_t>& comm, double resolution,
                double m2, int& sweeps) {
  const auto n = g.size();
  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) tot[comm[i]] += g.degree[i];

  std::vector<double> link(n, 0.0);
  std::vector<std::uint32_t> touched;
  const double eps = 1e-12 * m2;

  bool any_move = false;
  for (bool moved = true; moved;) {
    moved = false;
    ++sweeps;
    for (std::size_t i = 0; i < n; ++i) {
      const auto own = comm[i];
      touched.clear();
      for (auto e = g.offsets[i]; e < g.offsets[i + 1]; ++e) {
        const auto c = comm[g.targets[e]];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += g.weights[e];
      }
      const double k = g.degree[i];
      tot[own] -= k;

      auto best = own;
      double best_gain = link[own] - resolution * tot[own] * k / m2;
      for (auto c : touched) {
        const double gain = link[c] - resolution * tot[c] * k / m2;
        if (gain > best_gain + eps) {
          best = c;
          best_gain = gain;
        }
      }
      tot[best] += k;
      if (best != own) {
        comm[i] = best;
        moved = true;
        any_move = true;
      }
      for (auto c : touched) link[c] = 0.0;
    }
  }
  return any_move;
}

// Renumbers communities densely in node order and builds the quotient graph.
LevelGraph aggregate(const LevelGraph& g, std::vector<std::uint32_t>& comm) {
  std::vector<std::uint32_t> dense(g.size(), UINT32_MAX);
  std::uint32_t k = 0;
  for (auto& c : comm) {
    if (dense[c] == UINT32_MAX) dense[c] = k++;
    c = dense[c];
  }

  LevelGraph next;
  next.loops.assign(k, 0.0);
  next.degree.assign(k, 0.0);
  std::vector<std::map<std::uint32_t, double>> rows(k);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto ci = comm[i];
    next.loops[ci] += g.loops[i];
    next.degree[ci] += g.degree[i];
    for (auto e = g.offsets[i]; e < g.offsets[i + 1]; ++e) {
      const auto cj = comm[g.targets[e]];
      if (cj == ci) {
        next.loops[ci] += 0.5 * g.weights[e];  // each internal edge is seen from both ends
      } else {
        rows[ci][cj] += g.weights[e];
      }
    }
  }
  for (std::uint32_t c = 0; c < k; ++c) {
    for (const auto& [t, w] : rows[c]) {
      next.targets.push_back(t);
      next.weights.push_back(w);
    }
    next.offsets.push_back(next.targets.size());
  }
  return next;
}

}  // namespace

std::vector<int> louvain(const CollabGraph& graph, const DetectParams& params,
                         DetectTrace* trace) {
  const auto n = graph.node_count();
  std::vector<int> membership(n);
  for (std::size_t v = 0; v < n; ++v) membership[v] = static_cast<int>(v);
  const double m2 = 2.0 * graph.total_edge_weight();
  if (m2 <= 0.0) return membership;

  LevelGraph level = from_collab(graph);
  int sweeps = 0;
  for (int depth = 0; depth < params.maxLevels; ++depth) {
    std::vector<std::uint32_t> comm(level.size());
    for (std::uint32_t i = 0; i < comm.size(); ++i) comm[i] = i;

    const double before = trace ? modularity(graph, membership, params.resolution) : 0.0;
    const bool changed = move_nodes(level, comm, params.resolution, m2, sweeps);
    if (!changed) break;

    level = aggregate(level, comm);
    for (auto& c : membership) c = static_cast<int>(comm[static_cast<std::size_t>(c)]);
    if (trace)
      trace->levels.emplace_back(before, modularity(graph, membership, params.resolution));
  }
  if (trace) trace->sweeps = sweeps;
  return membership;
}

}  // namespace collabnet::detail
