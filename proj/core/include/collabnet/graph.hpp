#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "collabnet/ingest.hpp"

namespace collabnet {

using NodeIndex = std::uint32_t;

struct NodeInfo {
  std::string id;  // orgID
  std::string name;
  std::string country;
  /// Value of projects in which the organisation was the only positive-weight
  /// participant; it has no partner to be spread over.
  double soloWeight = 0.0;
  /// Number of projects with a positive weight for this organisation in the year.
  int participations = 0;
};

struct Edge {
  NodeIndex u = 0;
  NodeIndex v = 0;
  double weight = 0.0;
};

struct Neighbor {
  NodeIndex node = 0;
  double weight = 0.0;
};

/// Weighted undirected simple graph of one year. Immutable after construction.
///
/// Storage order of nodes and edges is significant: community detection
/// consumes them in this order, which is what shuffle() perturbs.
class CollabGraph {
 public:
  CollabGraph() = default;

  /// Throws Error(InvalidArgument) on self-loops, duplicate pairs, non-positive
  /// weights, out-of-range endpoints or duplicate node ids.
  CollabGraph(int year, std::vector<NodeInfo> nodes, std::vector<Edge> edges);

  int year() const { return year_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return nodes_.empty(); }

  const std::vector<NodeInfo>& nodes() const { return nodes_; }
  const NodeInfo& node(NodeIndex v) const { return nodes_[v]; }
  std::span<const Edge> edges() const { return edges_; }
  /// Neighbours in the order their edges appear in storage.
  std::span<const Neighbor> neighbors(NodeIndex v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }

  std::optional<NodeIndex> find(std::string_view id) const;
  /// Throws Error(NodeAbsent).
  NodeIndex index_of(std::string_view id) const;

  std::size_t degree(NodeIndex v) const { return offsets_[v + 1] - offsets_[v]; }
  double strength(NodeIndex v) const { return strength_[v]; }

  double total_edge_weight() const { return total_edge_weight_; }
  double total_solo_weight() const;

  /// Subgraph on `members` (indices into this graph), in the given order.
  CollabGraph induced(std::span<const NodeIndex> members) const;

  struct CanonicalEdge {
    std::string a, b;  // a < b
    double weight;
    auto operator<=>(const CanonicalEdge&) const = default;
  };
  /// Edge list keyed by orgID, sorted; independent of storage order.
  std::vector<CanonicalEdge> canonical_edges() const;

 private:
  int year_ = 0;
  std::vector<NodeInfo> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adjacency_;
  std::vector<double> strength_;
  std::unordered_map<std::string, NodeIndex> index_;
  double total_edge_weight_ = 0.0;
};

struct OrgInfo {
  std::string name;
  std::string country;
};
using OrgDirectory = std::map<std::string, OrgInfo>;

/// First-seen name and country per orgID.
OrgDirectory build_directory(const TableSet& tables);

enum class ProjectionRule {
  /// Each project's value is split over participant pairs in proportion to
  /// w_i * w_j, so the project's edges sum to its total value.
  ProductSplit,
  /// Plain W^T W off-diagonal products; does not conserve value.
  RawProduct,
};

const char* to_string(ProjectionRule r);
std::optional<ProjectionRule> projection_from_string(std::string_view s);

/// One-mode organisation network of one year. Nodes are the organisations with
/// at least one positive weight; zero-weight participations are ignored.
CollabGraph project_one_mode(const WeightMatrix& weights,
                             ProjectionRule rule = ProjectionRule::ProductSplit,
                             const OrgDirectory* directory = nullptr,
                             std::vector<std::string>* log = nullptr);

/// Same topology and weights with node and edge storage order permuted by `seed`.
CollabGraph shuffle(const CollabGraph& graph, std::uint64_t seed);

struct LabelSplit {
  WeightMatrix whenTrue;
  WeightMatrix whenFalse;
  std::size_t unknownProjects = 0;
};

/// projID -> label value for one label name.
std::unordered_map<std::string, LabelValue> project_labels(const TableSet& tables,
                                                           const std::string& label);

/// Routes entries by their project's label; unknown-label projects are dropped
/// and counted.
LabelSplit split_by_label(const WeightMatrix& weights,
                          const std::unordered_map<std::string, LabelValue>& labels);

void write_graphml(std::ostream& out, const CollabGraph& graph);
/// "orgID,orgID,weight" rows in canonical order, with a header line.
void write_edge_list(std::ostream& out, const CollabGraph& graph);

}  // namespace collabnet
