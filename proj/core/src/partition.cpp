#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "collabnet/community.hpp"
#include "collabnet/csv.hpp"
#include "collabnet/error.hpp"
#include "collabnet/hashing.hpp"

namespace collabnet {

Partition Partition::from_membership(const CollabGraph& graph, std::span<const int> membership) {
  if (membership.size() != graph.node_count())
    throw Error(ErrorKind::CoverageMismatch, "membership size differs from node count");
  Partition p;
  p.year = graph.year();
  std::vector<NodeIndex> order(graph.node_count());
  std::iota(order.begin(), order.end(), NodeIndex{0});
  std::sort(order.begin(), order.end(),
            [&](NodeIndex a, NodeIndex b) { return graph.node(a).id < graph.node(b).id; });
  p.nodes_.reserve(order.size());
  p.membership_.reserve(order.size());
  for (auto v : order) {
    p.nodes_.push_back(graph.node(v).id);
    p.membership_.push_back(membership[v]);
  }
  p.normalise();
  return p;
}

Partition Partition::from_assignment(const std::map<std::string, int>& assignment) {
  Partition p;
  for (const auto& [id, c] : assignment) {
    p.nodes_.push_back(id);
    p.membership_.push_back(c);
  }
  p.normalise();
  return p;
}

void Partition::normalise() {
  std::unordered_map<int, int> relabel;
  for (auto& c : membership_) {
    auto [it, fresh] = relabel.try_emplace(c, static_cast<int>(relabel.size()));
    c = it->second;
  }
  k_ = static_cast<int>(relabel.size());
  key_ = canonicalize(*this);
}

int Partition::community_of(std::string_view orgID) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), orgID);
  if (it == nodes_.end() || *it != orgID) return -1;
  return membership_[static_cast<std::size_t>(it - nodes_.begin())];
}

std::vector<std::vector<std::string>> Partition::communities() const {
  std::vector<std::vector<std::string>> out(static_cast<std::size_t>(k_));
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    out[static_cast<std::size_t>(membership_[i])].push_back(nodes_[i]);
  return out;
}

std::map<std::string, int> Partition::assignment() const {
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) out.emplace(nodes_[i], membership_[i]);
  return out;
}

std::vector<int> Partition::membership_for(const CollabGraph& graph) const {
  if (graph.node_count() != nodes_.size())
    throw Error(ErrorKind::CoverageMismatch,
                fmt::format("partition covers {} nodes, graph has {}", nodes_.size(),
                            graph.node_count()));
  std::vector<int> out(graph.node_count());
  for (NodeIndex v = 0; v < graph.node_count(); ++v) {
    const int c = community_of(graph.node(v).id);
    if (c < 0)
      throw Error(ErrorKind::CoverageMismatch, "partition does not cover " + graph.node(v).id);
    out[v] = c;
  }
  return out;
}

// Members are sorted within a community and communities are ordered by their
// smallest member, which is exactly the sorted list of sorted member sets.
std::string canonicalize(const Partition& partition) {
  std::string text;
  for (const auto& community : partition.communities()) {
    for (const auto& id : community) {
      text += id;
      text.push_back('\x1f');
    }
    text.push_back('\x1e');
  }
  return sha256_hex(text).substr(0, 32);
}

double modularity(const CollabGraph& graph, std::span<const int> membership, double resolution) {
  if (membership.size() != graph.node_count())
    throw Error(ErrorKind::CoverageMismatch, "membership size differs from node count");
  const double m = graph.total_edge_weight();
  if (m <= 0.0) return 0.0;
  const int k = membership.empty() ? 0 : *std::max_element(membership.begin(), membership.end()) + 1;
  std::vector<double> internal(static_cast<std::size_t>(k), 0.0);
  std::vector<double> boundary(static_cast<std::size_t>(k), 0.0);
  for (const auto& e : graph.edges()) {
    const auto cu = static_cast<std::size_t>(membership[e.u]);
    const auto cv = static_cast<std::size_t>(membership[e.v]);
    if (cu == cv) {
      internal[cu] += e.weight;
    } else {
      boundary[cu] += e.weight;
      boundary[cv] += e.weight;
    }
  }
  // Community degree as 2 * internal + boundary keeps the single-community case exactly zero.
  double q = 0.0;
  for (std::size_t c = 0; c < internal.size(); ++c) {
    const double share = (2.0 * internal[c] + boundary[c]) / (2.0 * m);
    q += internal[c] / m - resolution * share * share;
  }
  return q;
}

double modularity(const CollabGraph& graph, const Partition& partition, double resolution) {
  const auto membership = partition.membership_for(graph);
  return modularity(graph, membership, resolution);
}

ValidityReport validate(const CollabGraph& graph, const Partition& partition) {
  const auto membership = partition.membership_for(graph);
  const auto k = static_cast<std::size_t>(partition.community_count());

  ValidityReport report;
  report.partitionKey = partition.key();
  report.connectedOK.assign(k, true);
  report.mixingParameter.assign(k, 0.0);

  std::vector<std::vector<NodeIndex>> members(k);
  for (NodeIndex v = 0; v < graph.node_count(); ++v)
    members[static_cast<std::size_t>(membership[v])].push_back(v);

  std::vector<char> seen(graph.node_count(), 0);
  std::vector<NodeIndex> stack;
  for (std::size_t c = 0; c < k; ++c) {
    const auto& group = members[c];
    if (group.size() == 1) ++report.singletonCount;

    double external = 0.0, incident = 0.0;
    for (auto v : group)
      for (const auto& nb : graph.neighbors(v)) {
        incident += nb.weight;
        if (membership[nb.node] != static_cast<int>(c)) external += nb.weight;
      }
    report.mixingParameter[c] = incident > 0.0 ? external / incident : 0.0;

    std::size_t reached = 0;
    stack.assign(1, group.front());
    seen[group.front()] = 1;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      ++reached;
      for (const auto& nb : graph.neighbors(v))
        if (!seen[nb.node] && membership[nb.node] == static_cast<int>(c)) {
          seen[nb.node] = 1;
          stack.push_back(nb.node);
        }
    }
    report.connectedOK[c] = reached == group.size();
    if (!report.connectedOK[c] || report.mixingParameter[c] > 0.5) report.valid = false;
  }
  return report;
}

Similarity similarity(const Partition& a, const Partition& b) {
  if (a.nodes() != b.nodes())
    throw Error(ErrorKind::CoverageMismatch, "partitions cover different node sets");
  const auto n = a.size();
  if (n == 0) return {1.0, 1.0};

  std::map<std::pair<int, int>, double> contingency;
  std::vector<double> rows(static_cast<std::size_t>(a.community_count()), 0.0);
  std::vector<double> cols(static_cast<std::size_t>(b.community_count()), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int x = a.membership()[i], y = b.membership()[i];
    contingency[{x, y}] += 1.0;
    rows[static_cast<std::size_t>(x)] += 1.0;
    cols[static_cast<std::size_t>(y)] += 1.0;
  }

  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [cell, count] : contingency) index += comb2(count);
  for (auto r : rows) sum_rows += comb2(r);
  for (auto c : cols) sum_cols += comb2(c);
  const double pairs = comb2(static_cast<double>(n));
  const double expected = pairs > 0.0 ? sum_rows * sum_cols / pairs : 0.0;
  const double maximum = 0.5 * (sum_rows + sum_cols);

  Similarity s;
  s.ari = maximum == expected ? 1.0 : (index - expected) / (maximum - expected);

  const double total = static_cast<double>(n);
  double mutual = 0.0, h_rows = 0.0, h_cols = 0.0;
  for (const auto& [cell, count] : contingency)
    mutual += count / total *
              std::log(total * count / (rows[static_cast<std::size_t>(cell.first)] *
                                        cols[static_cast<std::size_t>(cell.second)]));
  for (auto r : rows) h_rows -= r / total * std::log(r / total);
  for (auto c : cols) h_cols -= c / total * std::log(c / total);
  s.nmi = h_rows + h_cols > 0.0 ? 2.0 * mutual / (h_rows + h_cols) : 1.0;
  return s;
}

void write_partition_csv(std::ostream& out, std::span<const Partition> partitions) {
  csv::Writer w(out);
  w.row({"year", "orgID", "community"});
  for (const auto& p : partitions)
    for (std::size_t i = 0; i < p.size(); ++i)
      w.row({std::to_string(p.year), p.nodes()[i], std::to_string(p.membership()[i])});
}

std::vector<Partition> read_partition_csv(const std::string& text) {
  const auto table = csv::parse(text, ',');
  std::map<int, std::map<std::string, int>> by_year;
  for (const auto& r : table.rows) {
    if (r.fields.size() != 3) throw Error(ErrorKind::InvalidArgument, "bad partition row");
    int year = 0, community = 0;
    auto ok = [](const std::string& s, int& v) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      return ec == std::errc{} && p == s.data() + s.size();
    };
    if (!ok(r.fields[0], year) || !ok(r.fields[2], community))
      throw Error(ErrorKind::InvalidArgument, fmt::format("bad partition row at line {}", r.line));
    by_year[year].emplace(r.fields[1], community);
  }
  std::vector<Partition> out;
  for (const auto& [year, assignment] : by_year) {
    auto p = Partition::from_assignment(assignment);
    p.year = year;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace collabnet
