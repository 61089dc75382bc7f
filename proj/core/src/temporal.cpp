#include "collabnet/temporal.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>
#include <unordered_map>

#include "collabnet/csv.hpp"
#include "collabnet/error.hpp"

namespace collabnet {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Continue: return "continue";
    case EventKind::Split: return "split";
    case EventKind::Merge: return "merge";
    case EventKind::Mix: return "mix";
    case EventKind::Disjoint: return "disjoint";
  }
  return "disjoint";
}

namespace {

struct OverlapTable {
  std::vector<std::size_t> from_size, to_size;
  std::map<std::pair<int, int>, std::size_t> overlap;
};

// Organisations present in only one of the two years do not count towards
// any overlap, but they do count towards community sizes.
OverlapTable overlaps(const Partition& from, const Partition& to) {
  OverlapTable t;
  t.from_size.assign(static_cast<std::size_t>(from.community_count()), 0);
  t.to_size.assign(static_cast<std::size_t>(to.community_count()), 0);
  for (int c : from.membership()) ++t.from_size[static_cast<std::size_t>(c)];
  for (int c : to.membership()) ++t.to_size[static_cast<std::size_t>(c)];
  for (std::size_t i = 0; i < from.size(); ++i) {
    const int j = to.community_of(from.nodes()[i]);
    if (j >= 0) ++t.overlap[{from.membership()[i], j}];
  }
  return t;
}

std::vector<LineageEvent> classify(const Partition& from, const Partition& to, double theta,
                                   bool with_disjoint) {
  const auto t = overlaps(from, to);
  auto f_src = [&](int i, std::size_t o) {
    return static_cast<double>(o) / static_cast<double>(t.from_size[static_cast<std::size_t>(i)]);
  };
  auto f_dst = [&](int j, std::size_t o) {
    return static_cast<double>(o) / static_cast<double>(t.to_size[static_cast<std::size_t>(j)]);
  };

  std::map<int, int> split_targets, merge_sources;
  for (const auto& [pair, o] : t.overlap) {
    if (f_dst(pair.second, o) > theta) ++split_targets[pair.first];
    if (f_src(pair.first, o) > theta) ++merge_sources[pair.second];
  }

  std::vector<LineageEvent> events;
  for (int i = 0; i < from.community_count(); ++i)
    for (int j = 0; j < to.community_count(); ++j) {
      auto it = t.overlap.find({i, j});
      const std::size_t o = it == t.overlap.end() ? 0 : it->second;
      if (o == 0 && !with_disjoint) continue;

      LineageEvent e;
      e.fromYear = from.year;
      e.fromCommunity = i;
      e.toCommunity = j;
      e.overlap = o;
      const auto uni = t.from_size[static_cast<std::size_t>(i)] +
                       t.to_size[static_cast<std::size_t>(j)] - o;
      e.jaccard = static_cast<double>(o) / static_cast<double>(uni);
      if (o == 0) {
        e.kind = EventKind::Disjoint;
      } else {
        const bool split = f_dst(j, o) > theta && split_targets[i] >= 2;
        const bool merge = f_src(i, o) > theta && merge_sources[j] >= 2;
        if (split && merge)
          e.kind = EventKind::Mix;
        else if (split)
          e.kind = EventKind::Split;
        else if (merge)
          e.kind = EventKind::Merge;
        else if (f_src(i, o) > theta && f_dst(j, o) > theta)
          e.kind = EventKind::Continue;
        else
          e.kind = EventKind::Mix;
      }
      events.push_back(e);
    }
  return events;
}

}  // namespace

std::vector<LineageEvent> match_communities(const Partition& from, const Partition& to,
                                            double theta) {
  return classify(from, to, theta, false);
}

std::vector<LineageEvent> event_matrix(const Partition& from, const Partition& to, double theta) {
  return classify(from, to, theta, true);
}

const std::string& GlobalLabelMap::label(int year, int community) const {
  static const std::string none;
  auto it = labels.find({year, community});
  return it == labels.end() ? none : it->second;
}

GlobalLabelMap assign_global_labels(std::span<const Partition> partitions,
                                    std::span<const std::vector<LineageEvent>> events) {
  GlobalLabelMap out;
  if (partitions.empty()) return out;
  for (std::size_t i = 1; i < partitions.size(); ++i)
    if (partitions[i].year != partitions[i - 1].year + 1)
      throw Error(ErrorKind::MissingYear,
                  fmt::format("no partition for year {}", partitions[i - 1].year + 1));
  if (events.size() + 1 < partitions.size())
    throw Error(ErrorKind::InvalidArgument, "events missing for some consecutive years");

  int next_label = 1;
  auto fresh = [&](int year, int community, std::string reason) {
    auto name = fmt::format("G{:04}", next_label++);
    out.labels[{year, community}] = name;
    out.created.push_back({name, year, community, std::move(reason)});
  };

  for (int c = 0; c < partitions.front().community_count(); ++c)
    fresh(partitions.front().year, c, "first year");

  for (std::size_t y = 0; y + 1 < partitions.size(); ++y) {
    const int from_year = partitions[y].year;
    const int to_year = partitions[y + 1].year;

    // Split sources pass their label to the largest-overlap branch only.
    std::map<int, const LineageEvent*> split_branch;
    for (const auto& e : events[y]) {
      if (e.kind != EventKind::Split) continue;
      auto& best = split_branch[e.fromCommunity];
      if (!best || std::tie(e.overlap, e.jaccard) > std::tie(best->overlap, best->jaccard) ||
          (e.overlap == best->overlap && e.jaccard == best->jaccard &&
           e.toCommunity < best->toCommunity))
        best = &e;
    }

    std::vector<const LineageEvent*> claims;
    std::map<int, int> continues_into;
    for (const auto& e : events[y]) {
      switch (e.kind) {
        case EventKind::Continue:
          ++continues_into[e.toCommunity];
          claims.push_back(&e);
          break;
        case EventKind::Merge: claims.push_back(&e); break;
        case EventKind::Split:
          if (split_branch[e.fromCommunity] == &e) claims.push_back(&e);
          break;
        default: break;
      }
    }
    for (const auto& [target, count] : continues_into)
      if (count > 1)
        out.log.push_back(fmt::format(
            "{}: {} continue events into community {}; resolved by largest overlap", to_year,
            count, target));

    std::sort(claims.begin(), claims.end(), [](const auto* a, const auto* b) {
      if (a->overlap != b->overlap) return a->overlap > b->overlap;
      if (a->jaccard != b->jaccard) return a->jaccard > b->jaccard;
      if (a->fromCommunity != b->fromCommunity) return a->fromCommunity < b->fromCommunity;
      return a->toCommunity < b->toCommunity;
    });

    std::set<std::string> used;
    for (const auto* e : claims) {
      const auto key = std::make_pair(to_year, e->toCommunity);
      if (out.labels.contains(key)) continue;
      const auto& inherited = out.label(from_year, e->fromCommunity);
      if (inherited.empty() || used.contains(inherited)) continue;
      used.insert(inherited);
      out.labels[key] = inherited;
    }
    for (int c = 0; c < partitions[y + 1].community_count(); ++c)
      if (!out.labels.contains({to_year, c})) fresh(to_year, c, "no inheriting predecessor");
  }
  return out;
}

GlobalLabelMap assign_global_labels(std::span<const Partition> partitions, double theta) {
  std::vector<std::vector<LineageEvent>> events;
  for (std::size_t i = 0; i + 1 < partitions.size(); ++i)
    events.push_back(match_communities(partitions[i], partitions[i + 1], theta));
  return assign_global_labels(partitions, events);
}

std::vector<SeriesRow> community_series(const GlobalLabelMap& labels,
                                        std::span<const Partition> partitions,
                                        std::span<const CentralityRow> centrality,
                                        std::optional<std::size_t> topN) {
  std::map<std::pair<int, std::string>, double> strength;
  for (const auto& r : centrality) strength[{r.year, r.orgID}] = r.strength;

  std::map<std::pair<std::string, int>, SeriesRow> rows;
  for (const auto& p : partitions)
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto& label = labels.label(p.year, p.membership()[i]);
      auto& row = rows[{label, p.year}];
      row.label = label;
      row.year = p.year;
      ++row.memberCount;
      if (auto it = strength.find({p.year, p.nodes()[i]}); it != strength.end())
        row.totalStrength += it->second;
    }

  std::map<std::string, double> peak;
  for (const auto& [key, row] : rows) peak[row.label] = std::max(peak[row.label], row.totalStrength);
  std::vector<std::pair<std::string, double>> ranking(peak.begin(), peak.end());
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (topN && ranking.size() > *topN) ranking.resize(*topN);

  std::vector<SeriesRow> out;
  for (const auto& [label, _] : ranking)
    for (auto it = rows.lower_bound({label, INT32_MIN}); it != rows.end() && it->first.first == label;
         ++it)
      out.push_back(it->second);
  return out;
}

void write_events_csv(std::ostream& out, std::span<const LineageEvent> events) {
  csv::Writer w(out);
  w.row({"fromYear", "fromCommunity", "toCommunity", "kind", "overlap", "jaccard"});
  for (const auto& e : events)
    w.row({std::to_string(e.fromYear), std::to_string(e.fromCommunity),
           std::to_string(e.toCommunity), to_string(e.kind), std::to_string(e.overlap),
           csv::format_number(e.jaccard)});
}

void write_label_map_csv(std::ostream& out, const GlobalLabelMap& labels) {
  csv::Writer w(out);
  w.row({"year", "localCommunity", "globalLabel"});
  for (const auto& [key, label] : labels.labels)
    w.row({std::to_string(key.first), std::to_string(key.second), label});
}

void write_label_log_csv(std::ostream& out, const GlobalLabelMap& labels) {
  csv::Writer w(out);
  w.row({"globalLabel", "year", "localCommunity", "reason"});
  for (const auto& c : labels.created)
    w.row({c.label, std::to_string(c.year), std::to_string(c.community), c.reason});
}

void write_series_csv(std::ostream& out, std::span<const SeriesRow> rows) {
  csv::Writer w(out);
  w.row({"globalLabel", "year", "totalStrength", "memberCount"});
  for (const auto& r : rows)
    w.row({r.label, std::to_string(r.year), csv::format_number(r.totalStrength),
           std::to_string(r.memberCount)});
}

}  // namespace collabnet
