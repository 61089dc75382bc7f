#pragma once

#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "collabnet/graph.hpp"

namespace collabnet {

struct CentralityRow {
  int year = 0;
  std::string orgID;
  std::size_t degree = 0;
  double strength = 0.0;  // kEUR
  std::size_t coreness = 0;
  int participations = 0;
};

/// Distinct neighbours of `orgID`; throws Error(NodeAbsent).
std::size_t degree(const CollabGraph& graph, std::string_view orgID);
/// Sum of incident edge weights; throws Error(NodeAbsent).
double strength(const CollabGraph& graph, std::string_view orgID);

/// k-core number of every node by index, on unweighted degrees.
/// Bucket-based peeling in O(n + m).
std::vector<std::size_t> core_numbers(const CollabGraph& graph);

/// k-core number keyed by orgID.
std::unordered_map<std::string, std::size_t> coreness(const CollabGraph& graph);

/// One row per (year, node), sorted by (year, orgID).
std::vector<CentralityRow> centrality_table(std::span<const CollabGraph> graphs);

struct CentralityRange {
  int year = 0;
  std::size_t nodes = 0;
  std::size_t minDegree = 0, maxDegree = 0;
  double minStrength = 0.0, maxStrength = 0.0;
  std::size_t minCoreness = 0, maxCoreness = 0;
};

/// Per-year min/max of each measure, in year order.
std::vector<CentralityRange> centrality_ranges(std::span<const CentralityRow> rows);

/// "year,orgID,degree,strength,coreness,participations"
void write_centrality_csv(std::ostream& out, std::span<const CentralityRow> rows);
std::vector<CentralityRow> read_centrality_csv(const std::string& text);

}  // namespace collabnet
