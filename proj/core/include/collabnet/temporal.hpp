#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "collabnet/centrality.hpp"
#include "collabnet/community.hpp"

namespace collabnet {

enum class EventKind { Continue, Split, Merge, Mix, Disjoint };

const char* to_string(EventKind k);

struct LineageEvent {
  int fromYear = 0;
  int fromCommunity = 0;
  int toCommunity = 0;
  EventKind kind = EventKind::Disjoint;
  std::size_t overlap = 0;
  double jaccard = 0.0;
};

/// Classifies every overlapping pair (C_i in `from`, C_j in `to`).
///
/// With f_src = overlap/|C_i| and f_dst = overlap/|C_j|:
///  - split: C_i has >= 2 targets with f_dst > theta; those pairs are splits
///  - merge: C_j has >= 2 sources with f_src > theta; those pairs are merges
///  - continue: f_src > theta and f_dst > theta, and neither of the above
///  - mix: every other overlapping pair (including pairs that are both split
///    and merge, which needs theta < 0.5)
/// Pairs without shared members are not emitted.
std::vector<LineageEvent> match_communities(const Partition& from, const Partition& to,
                                            double theta = 0.5);

/// As match_communities, plus a disjoint row for every non-overlapping pair.
std::vector<LineageEvent> event_matrix(const Partition& from, const Partition& to,
                                       double theta = 0.5);

struct LabelCreation {
  std::string label;
  int year = 0;
  int community = 0;
  std::string reason;
};

struct GlobalLabelMap {
  std::map<std::pair<int, int>, std::string> labels;  // (year, local community) -> label
  std::vector<LabelCreation> created;
  std::vector<std::string> log;

  /// Empty string when unassigned.
  const std::string& label(int year, int community) const;
};

/// Folds left to right over consecutive years. `events[i]` links
/// `partitions[i]` to `partitions[i + 1]`. Continue and merge targets inherit
/// from their largest-overlap source, a split passes its label to its
/// largest-overlap branch; every label is inherited at most once per year and
/// everything else gets a fresh label. Ties: larger jaccard, then smaller
/// community key. Throws Error(MissingYear) on a gap in the years.
GlobalLabelMap assign_global_labels(std::span<const Partition> partitions,
                                    std::span<const std::vector<LineageEvent>> events);

/// Computes the events itself with threshold theta.
GlobalLabelMap assign_global_labels(std::span<const Partition> partitions, double theta = 0.5);

struct SeriesRow {
  std::string label;
  int year = 0;
  double totalStrength = 0.0;
  std::size_t memberCount = 0;
};

/// Per global label and year: summed member strength and member count.
/// With topN, keeps the labels with the largest peak yearly strength.
std::vector<SeriesRow> community_series(const GlobalLabelMap& labels,
                                        std::span<const Partition> partitions,
                                        std::span<const CentralityRow> centrality,
                                        std::optional<std::size_t> topN = std::nullopt);

/// "fromYear,fromCommunity,toCommunity,kind,overlap,jaccard"
void write_events_csv(std::ostream& out, std::span<const LineageEvent> events);
/// "year,localCommunity,globalLabel"
void write_label_map_csv(std::ostream& out, const GlobalLabelMap& labels);
/// "globalLabel,year,localCommunity,reason"
void write_label_log_csv(std::ostream& out, const GlobalLabelMap& labels);
/// "globalLabel,year,totalStrength,memberCount"
void write_series_csv(std::ostream& out, std::span<const SeriesRow> rows);

}  // namespace collabnet
