#include "collabnet/community.hpp"

#include "collabnet/error.hpp"

namespace collabnet {

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Louvain: return "louvain";
    case Algorithm::LabelPropagation: return "labelPropagation";
    case Algorithm::Walktrap: return "walktrap";
  }
  return "walktrap";
}

std::optional<Algorithm> algorithm_from_string(std::string_view s) {
  if (s == "louvain" || s == "LV") return Algorithm::Louvain;
  if (s == "labelPropagation" || s == "LP") return Algorithm::LabelPropagation;
  if (s == "walktrap" || s == "WT") return Algorithm::Walktrap;
  return std::nullopt;
}

Partition detect(const CollabGraph& graph, Algorithm algorithm, const DetectParams& params,
                 std::uint64_t seed, DetectTrace* trace) {
  if (graph.empty()) throw Error(ErrorKind::InvalidArgument, "cannot detect communities on an empty graph");
  std::vector<int> membership;
  switch (algorithm) {
    case Algorithm::Louvain: membership = detail::louvain(graph, params, trace); break;
    case Algorithm::LabelPropagation:
      membership = detail::label_propagation(graph, params, seed, trace);
      break;
    case Algorithm::Walktrap: membership = detail::walktrap(graph, params); break;
  }
  auto partition = Partition::from_membership(graph, membership);
  partition.algorithm = algorithm;
  partition.seed = seed;
  return partition;
}

}  // namespace collabnet
