#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "collabnet/graph.hpp"

namespace collabnet {

enum class Algorithm { Louvain, LabelPropagation, Walktrap };

const char* to_string(Algorithm a);
std::optional<Algorithm> algorithm_from_string(std::string_view s);

struct DetectParams {
  double resolution = 1.0;      // Louvain, modularity
  int walkLength = 4;           // Walktrap
  int maxSweeps = 1000;         // Label Propagation sweeps before giving up
  int maxLevels = 64;           // Louvain aggregation levels
};

/// Node -> community assignment in canonical form.
///
/// Nodes are kept sorted by orgID and communities are numbered 0..k-1 in the
/// order of their smallest member, so two partitions that group the same
/// nodes the same way are equal field-by-field regardless of the labels or
/// node order they were built from.
class Partition {
 public:
  Partition() = default;

  /// `membership[v]` is the community of graph node v (arbitrary labels).
  static Partition from_membership(const CollabGraph& graph, std::span<const int> membership);
  /// Arbitrary labels keyed by orgID.
  static Partition from_assignment(const std::map<std::string, int>& assignment);

  int year = 0;
  Algorithm algorithm = Algorithm::Walktrap;
  std::uint64_t seed = 0;

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<int>& membership() const { return membership_; }
  std::size_t size() const { return nodes_.size(); }
  int community_count() const { return k_; }

  /// -1 when the node is not covered.
  int community_of(std::string_view orgID) const;
  /// Members of each community, sorted; communities in index order.
  std::vector<std::vector<std::string>> communities() const;
  std::map<std::string, int> assignment() const;

  /// Community per graph node; throws Error(CoverageMismatch) unless the
  /// partition covers exactly the graph's nodes.
  std::vector<int> membership_for(const CollabGraph& graph) const;

  /// Order-independent fingerprint: hash of the sorted list of sorted member sets.
  const std::string& key() const { return key_; }

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.nodes_ == b.nodes_ && a.membership_ == b.membership_;
  }

 private:
  void normalise();

  std::vector<std::string> nodes_;
  std::vector<int> membership_;
  int k_ = 0;
  std::string key_;
};

/// canonicalKey of a partition.
std::string canonicalize(const Partition& partition);

/// Per-level modularity recorded by Louvain (before, after).
struct DetectTrace {
  std::vector<std::pair<double, double>> levels;
  int sweeps = 0;
};

/// Runs one community detection algorithm. Nodes and edges are consumed in
/// storage order. Label Propagation throws Error(Nonconvergence) when it does
/// not settle within params.maxSweeps.
Partition detect(const CollabGraph& graph, Algorithm algorithm, const DetectParams& params,
                 std::uint64_t seed, DetectTrace* trace = nullptr);

/// Weighted Newman modularity with resolution; 0 for a graph without edges.
double modularity(const CollabGraph& graph, const Partition& partition, double resolution = 1.0);
double modularity(const CollabGraph& graph, std::span<const int> membership,
                  double resolution = 1.0);

struct ValidityReport {
  std::string partitionKey;
  std::vector<bool> connectedOK;       // per community
  std::vector<double> mixingParameter; // per community
  std::size_t singletonCount = 0;
  bool valid = true;
};

/// A partition is valid when every community is internally connected and no
/// community sends more than half of its incident weight outside.
ValidityReport validate(const CollabGraph& graph, const Partition& partition);

struct Similarity {
  double ari = 0.0;
  double nmi = 0.0;
};

/// Adjusted Rand Index and arithmetic-mean normalised mutual information.
/// Throws Error(CoverageMismatch) when the node sets differ.
Similarity similarity(const Partition& a, const Partition& b);

/// "year,orgID,community"
void write_partition_csv(std::ostream& out, std::span<const Partition> partitions);
std::vector<Partition> read_partition_csv(const std::string& text);

namespace detail {
std::vector<int> louvain(const CollabGraph& graph, const DetectParams& params,
                         DetectTrace* trace);
std::vector<int> label_propagation(const CollabGraph& graph, const DetectParams& params,
                                   std::uint64_t seed, DetectTrace* trace);
std::vector<int> walktrap(const CollabGraph& graph, const DetectParams& params);
}  // namespace detail

}  // namespace collabnet
