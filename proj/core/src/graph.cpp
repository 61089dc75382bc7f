#include "collabnet/graph.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

#include "collabnet/csv.hpp"
#include "collabnet/error.hpp"
#include "collabnet/rng.hpp"

namespace collabnet {

CollabGraph::CollabGraph(int year, std::vector<NodeInfo> nodes, std::vector<Edge> edges)
    : year_(year), nodes_(std::move(nodes)), edges_(std::move(edges)) {
  const auto n = nodes_.size();
  index_.reserve(n);
  for (NodeIndex i = 0; i < n; ++i)
    if (!index_.emplace(nodes_[i].id, i).second)
      throw Error(ErrorKind::InvalidArgument, "duplicate node id " + nodes_[i].id);

  std::vector<std::size_t> degree(n, 0);
  std::vector<std::uint64_t> pairs;
  pairs.reserve(edges_.size());
  for (const auto& e : edges_) {
    if (e.u >= n || e.v >= n) throw Error(ErrorKind::InvalidArgument, "edge endpoint out of range");
    if (e.u == e.v) throw Error(ErrorKind::InvalidArgument, "self-loop on " + nodes_[e.u].id);
    if (!(e.weight > 0.0))
      throw Error(ErrorKind::InvalidArgument, "non-positive edge weight");
    pairs.push_back(std::uint64_t{std::min(e.u, e.v)} << 32 | std::max(e.u, e.v));
    ++degree[e.u];
    ++degree[e.v];
    total_edge_weight_ += e.weight;
  }
  std::sort(pairs.begin(), pairs.end());
  if (auto dup = std::adjacent_find(pairs.begin(), pairs.end()); dup != pairs.end())
    throw Error(ErrorKind::InvalidArgument,
                "duplicate edge " + nodes_[*dup >> 32].id + "-" + nodes_[*dup & 0xffffffffu].id);

  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  adjacency_.resize(offsets_[n]);
  strength_.assign(n, 0.0);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges_) {
    adjacency_[cursor[e.u]++] = {e.v, e.weight};
    adjacency_[cursor[e.v]++] = {e.u, e.weight};
    strength_[e.u] += e.weight;
    strength_[e.v] += e.weight;
  }
}

std::optional<NodeIndex> CollabGraph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex CollabGraph::index_of(std::string_view id) const {
  if (auto v = find(id)) return *v;
  throw Error(ErrorKind::NodeAbsent, fmt::format("node absent: {}", id));
}

double CollabGraph::total_solo_weight() const {
  double sum = 0.0;
  for (const auto& n : nodes_) sum += n.soloWeight;
  return sum;
}

CollabGraph CollabGraph::induced(std::span<const NodeIndex> members) const {
  std::vector<NodeInfo> nodes;
  std::vector<NodeIndex> local(nodes_.size(), UINT32_MAX);
  nodes.reserve(members.size());
  for (auto v : members) {
    local[v] = static_cast<NodeIndex>(nodes.size());
    nodes.push_back(nodes_[v]);
  }
  std::vector<Edge> edges;
  for (const auto& e : edges_)
    if (local[e.u] != UINT32_MAX && local[e.v] != UINT32_MAX)
      edges.push_back({local[e.u], local[e.v], e.weight});
  return CollabGraph(year_, std::move(nodes), std::move(edges));
}

std::vector<CollabGraph::CanonicalEdge> CollabGraph::canonical_edges() const {
  std::vector<CanonicalEdge> out;
  out.reserve(edges_.size());
  for (const auto& e : edges_) {
    const auto& a = nodes_[e.u].id;
    const auto& b = nodes_[e.v].id;
    out.push_back(a < b ? CanonicalEdge{a, b, e.weight} : CanonicalEdge{b, a, e.weight});
  }
  std::sort(out.begin(), out.end());
  return out;
}

OrgDirectory build_directory(const TableSet& tables) {
  OrgDirectory dir;
  for (const auto& r : tables.participations)
    dir.emplace(r.orgID, OrgInfo{r.orgName, r.countryCode});
  return dir;
}

const char* to_string(ProjectionRule r) {
  return r == ProjectionRule::ProductSplit ? "productSplit" : "rawProduct";
}

std::optional<ProjectionRule> projection_from_string(std::string_view s) {
  if (s == "productSplit") return ProjectionRule::ProductSplit;
  if (s == "rawProduct") return ProjectionRule::RawProduct;
  return std::nullopt;
}

CollabGraph project_one_mode(const WeightMatrix& weights, ProjectionRule rule,
                             const OrgDirectory* directory, std::vector<std::string>* log) {
  // Participants per project, ordered by orgID through the matrix key order.
  std::map<std::string, std::vector<std::pair<std::string, double>>> by_project;
  for (const auto& [key, w] : weights.entries) by_project[key.second].emplace_back(key.first, w);

  std::map<std::string, NodeInfo> nodes;
  for (const auto& [key, w] : weights.entries) {
    if (!(w > 0.0)) continue;
    auto& n = nodes[key.first];
    n.id = key.first;
    ++n.participations;
  }
  if (directory)
    for (auto& [id, n] : nodes)
      if (auto it = directory->find(id); it != directory->end()) {
        n.name = it->second.name;
        n.country = it->second.country;
      }

  std::vector<NodeInfo> node_list;
  std::unordered_map<std::string, NodeIndex> index;
  for (auto& [id, n] : nodes) {
    index.emplace(id, static_cast<NodeIndex>(node_list.size()));
    node_list.push_back(std::move(n));
  }

  // Keyed by (u << 32 | v); per-pair summation order follows project order either way.
  std::unordered_map<std::uint64_t, double> accumulated;
  for (const auto& [proj, members] : by_project) {
    std::vector<std::pair<NodeIndex, double>> positive;
    for (const auto& [org, w] : members)
      if (w > 0.0) positive.emplace_back(index.at(org), w);

    if (positive.empty()) {
      if (members.size() >= 2 && log)
        log->push_back(fmt::format("projection {}: project {} has only zero weights; no edges",
                                   weights.year, proj));
      continue;
    }
    if (positive.size() == 1) {
      node_list[positive.front().first].soloWeight += positive.front().second;
      continue;
    }

    double total = 0.0, pair_products = 0.0;
    for (std::size_t i = 0; i < positive.size(); ++i) {
      total += positive[i].second;
      for (std::size_t j = i + 1; j < positive.size(); ++j)
        pair_products += positive[i].second * positive[j].second;
    }
    for (std::size_t i = 0; i < positive.size(); ++i)
      for (std::size_t j = i + 1; j < positive.size(); ++j) {
        const double product = positive[i].second * positive[j].second;
        const double w =
            rule == ProjectionRule::ProductSplit ? product / pair_products * total : product;
        auto [u, v] = std::minmax(positive[i].first, positive[j].first);
        accumulated[(static_cast<std::uint64_t>(u) << 32) | v] += w;
      }
  }

  std::vector<std::pair<std::uint64_t, double>> sorted(accumulated.begin(), accumulated.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<Edge> edges;
  edges.reserve(sorted.size());
  for (const auto& [key, w] : sorted)
    if (w > 0.0)
      edges.push_back({static_cast<NodeIndex>(key >> 32), static_cast<NodeIndex>(key & 0xffffffffu), w});
  return CollabGraph(weights.year, std::move(node_list), std::move(edges));
}

CollabGraph shuffle(const CollabGraph& graph, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<NodeIndex> order(graph.node_count());
  std::iota(order.begin(), order.end(), NodeIndex{0});
  rng.shuffle(std::span<NodeIndex>(order));

  std::vector<NodeIndex> new_index(order.size());
  std::vector<NodeInfo> nodes;
  nodes.reserve(order.size());
  for (NodeIndex pos = 0; pos < order.size(); ++pos) {
    new_index[order[pos]] = pos;
    nodes.push_back(graph.node(order[pos]));
  }

  std::vector<Edge> edges;
  edges.reserve(graph.edge_count());
  for (const auto& e : graph.edges()) {
    Edge moved{new_index[e.u], new_index[e.v], e.weight};
    if (rng.coin()) std::swap(moved.u, moved.v);
    edges.push_back(moved);
  }
  rng.shuffle(std::span<Edge>(edges));
  return CollabGraph(graph.year(), std::move(nodes), std::move(edges));
}

std::unordered_map<std::string, LabelValue> project_labels(const TableSet& tables,
                                                           const std::string& label) {
  std::unordered_map<std::string, LabelValue> out;
  for (const auto& p : tables.projects) out.emplace(p.projID, p.label(label));
  return out;
}

LabelSplit split_by_label(const WeightMatrix& weights,
                          const std::unordered_map<std::string, LabelValue>& labels) {
  LabelSplit out;
  out.whenTrue.year = out.whenFalse.year = weights.year;
  out.whenTrue.basis = out.whenFalse.basis = weights.basis;
  std::set<std::string> unknown;
  for (const auto& [key, w] : weights.entries) {
    auto it = labels.find(key.second);
    const auto value = it == labels.end() ? LabelValue::Unknown : it->second;
    switch (value) {
      case LabelValue::True: out.whenTrue.entries.emplace(key, w); break;
      case LabelValue::False: out.whenFalse.entries.emplace(key, w); break;
      case LabelValue::Unknown: unknown.insert(key.second); break;
    }
  }
  out.unknownProjects = unknown.size();
  return out;
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

void write_graphml(std::ostream& out, const CollabGraph& graph) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
         "  <key id=\"name\" for=\"node\" attr.name=\"name\" attr.type=\"string\"/>\n"
         "  <key id=\"country\" for=\"node\" attr.name=\"country\" attr.type=\"string\"/>\n"
         "  <key id=\"solo\" for=\"node\" attr.name=\"soloWeight\" attr.type=\"double\"/>\n"
         "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n";
  out << "  <graph id=\"G" << graph.year() << "\" edgedefault=\"undirected\">\n";

  std::vector<NodeIndex> order(graph.node_count());
  std::iota(order.begin(), order.end(), NodeIndex{0});
  std::sort(order.begin(), order.end(),
            [&](NodeIndex a, NodeIndex b) { return graph.node(a).id < graph.node(b).id; });
  for (auto v : order) {
    const auto& n = graph.node(v);
    out << "    <node id=\"" << xml_escape(n.id) << "\">"
        << "<data key=\"name\">" << xml_escape(n.name) << "</data>"
        << "<data key=\"country\">" << xml_escape(n.country) << "</data>"
        << "<data key=\"solo\">" << csv::format_number(n.soloWeight) << "</data></node>\n";
  }
  for (const auto& e : graph.canonical_edges())
    out << "    <edge source=\"" << xml_escape(e.a) << "\" target=\"" << xml_escape(e.b)
        << "\"><data key=\"weight\">" << csv::format_number(e.weight) << "</data></edge>\n";
  out << "  </graph>\n</graphml>\n";
}

void write_edge_list(std::ostream& out, const CollabGraph& graph) {
  csv::Writer w(out);
  w.row({"orgID", "orgID", "weight"});
  for (const auto& e : graph.canonical_edges()) w.row({e.a, e.b, csv::format_number(e.weight)});
}

}  // namespace collabnet
