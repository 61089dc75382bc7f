#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "collabnet/community.hpp"

namespace collabnet::detail {

namespace {

// Candidate merges are ordered by increase in within-community distance;
// candidates whose increase is within kTieWindow (relative) of the minimum are
// considered tied and resolved by the communities' canonical keys, so the
// result does not depend on floating-point noise from storage order.
constexpr double kTieWindow = 1e-9;

struct Community {
  std::vector<double> prob;  // P^t row averaged over members
  std::map<std::uint32_t, double> adjacent;  // community -> connecting weight
  double size = 1.0;
  double internal = 0.0;  // edge weight inside
  double total = 0.0;     // sum of member strengths
  std::uint32_t key = 0;  // smallest orgID rank among members
  bool alive = true;
};

struct Candidate {
  double delta;
  std::uint32_t lo_key, hi_key;
  std::uint32_t a, b;

  bool operator<(const Candidate& o) const {
    if (delta != o.delta) return delta < o.delta;
    if (lo_key != o.lo_key) return lo_key < o.lo_key;
    return hi_key < o.hi_key;
  }
};

}  // namespace

std::vector<int> walktrap(const CollabGraph& graph, const DetectParams& params) {
  const std::size_t n = graph.node_count();
  std::vector<int> membership(n);
  std::iota(membership.begin(), membership.end(), 0);
  if (n == 0 || graph.edge_count() == 0) return membership;

  // Random walk with a self-loop of mean incident weight on every vertex.
  std::vector<double> loop(n), walk_degree(n);
  for (NodeIndex v = 0; v < n; ++v) {
    const auto deg = graph.degree(v);
    loop[v] = deg > 0 ? graph.strength(v) / static_cast<double>(deg) : 1.0;
    walk_degree[v] = graph.strength(v) + loop[v];
  }

  std::vector<std::uint32_t> rank(n);
  {
    std::vector<NodeIndex> order(n);
    std::iota(order.begin(), order.end(), NodeIndex{0});
    std::sort(order.begin(), order.end(),
              [&](NodeIndex a, NodeIndex b) { return graph.node(a).id < graph.node(b).id; });
    for (std::uint32_t r = 0; r < n; ++r) rank[order[r]] = r;
  }

  std::vector<Community> comms(n);
  std::vector<double> next(n);
  for (NodeIndex v = 0; v < n; ++v) {
    auto& c = comms[v];
    c.prob.assign(n, 0.0);
    c.prob[v] = 1.0;
    for (int step = 0; step < params.walkLength; ++step) {
      std::fill(next.begin(), next.end(), 0.0);
      for (NodeIndex k = 0; k < n; ++k) {
        const double p = c.prob[k];
        if (p == 0.0) continue;
        const double f = p / walk_degree[k];
        next[k] += f * loop[k];
        for (const auto& nb : graph.neighbors(k)) next[nb.node] += f * nb.weight;
      }
      c.prob.swap(next);
    }
    c.key = rank[v];
    c.total = graph.strength(v);
    for (const auto& nb : graph.neighbors(v)) c.adjacent[nb.node] += nb.weight;
  }

  auto delta_sigma = [&](const Community& x, const Community& y) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = x.prob[k] - y.prob[k];
      r2 += d * d / walk_degree[k];
    }
    return x.size * y.size / (x.size + y.size) * r2 / static_cast<double>(n);
  };
  auto candidate = [&](std::uint32_t a, std::uint32_t b) {
    const auto ka = comms[a].key, kb = comms[b].key;
    return Candidate{delta_sigma(comms[a], comms[b]), std::min(ka, kb), std::max(ka, kb), a, b};
  };

  std::set<Candidate> queue;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::set<Candidate>::iterator> lookup;
  auto push = [&](std::uint32_t a, std::uint32_t b) {
    auto it = queue.insert(candidate(a, b)).first;
    lookup.emplace(std::minmax(a, b), it);
  };
  auto erase = [&](std::uint32_t a, std::uint32_t b) {
    if (auto it = lookup.find(std::minmax(a, b)); it != lookup.end()) {
      queue.erase(it->second);
      lookup.erase(it);
    }
  };
  for (const auto& e : graph.edges()) push(e.u, e.v);

  const double m = graph.total_edge_weight();
  auto contribution = [&](const Community& c) {
    const double share = c.total / (2.0 * m);
    return c.internal / m - share * share;
  };
  double q = 0.0;
  for (const auto& c : comms) q += contribution(c);

  std::vector<std::pair<std::uint32_t, std::uint32_t>> merges;
  double best_q = q;
  std::size_t best_step = 0;

  while (!queue.empty()) {
    // Pick the tied candidate with the smallest keys.
    const double floor = queue.begin()->delta;
    const double limit = floor + kTieWindow * std::max(floor, 1e-300);
    auto chosen = queue.begin();
    for (auto it = std::next(queue.begin()); it != queue.end() && it->delta <= limit; ++it)
      if (std::tie(it->lo_key, it->hi_key) < std::tie(chosen->lo_key, chosen->hi_key))
        chosen = it;
    const auto a = chosen->a, b = chosen->b;

    const auto id = static_cast<std::uint32_t>(comms.size());
    comms.emplace_back();
    auto& A = comms[a];
    auto& B = comms[b];
    Community merged;
    merged.size = A.size + B.size;
    merged.prob.resize(n);
    for (std::size_t k = 0; k < n; ++k)
      merged.prob[k] = (A.size * A.prob[k] + B.size * B.prob[k]) / merged.size;
    merged.key = std::min(A.key, B.key);
    merged.total = A.total + B.total;
    merged.internal = A.internal + B.internal + A.adjacent.at(b);

    q -= contribution(A) + contribution(B);
    q += contribution(merged);

    for (const auto* side : {&A, &B})
      for (const auto& [other, w] : side->adjacent)
        if (other != a && other != b) merged.adjacent[other] += w;

    for (const auto& [other, w] : A.adjacent) erase(a, other);
    for (const auto& [other, w] : B.adjacent) erase(b, other);
    for (const auto& [other, w] : merged.adjacent) {
      auto& neighbour = comms[other].adjacent;
      neighbour.erase(a);
      neighbour.erase(b);
      neighbour.emplace(id, w);
    }

    A.alive = B.alive = false;
    A.prob = {};
    B.prob = {};
    comms[id] = std::move(merged);
    for (const auto& [other, w] : comms[id].adjacent) push(id, other);

    merges.emplace_back(a, b);
    if (q > best_q + 1e-12 * std::abs(best_q) + 1e-15) {
      best_q = q;
      best_step = merges.size();
    }
  }

  // Replay the dendrogram up to the modularity-maximising cut.
  std::vector<std::uint32_t> parent(comms.size());
  std::iota(parent.begin(), parent.end(), 0u);
  for (std::size_t s = 0; s < best_step; ++s) {
    const auto id = static_cast<std::uint32_t>(n + s);
    parent[merges[s].first] = id;
    parent[merges[s].second] = id;
  }
  for (std::size_t v = 0; v < n; ++v) {
    auto r = static_cast<std::uint32_t>(v);
    while (parent[r] != r) r = parent[r];
    membership[v] = static_cast<int>(r);
  }
  return membership;
}

}  // namespace collabnet::detail
