#include "collabnet/centrality.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "collabnet/csv.hpp"
#include "collabnet/error.hpp"

namespace collabnet {

std::size_t degree(const CollabGraph& graph, std::string_view orgID) {
  return graph.degree(graph.index_of(orgID));
}

double strength(const CollabGraph& graph, std::string_view orgID) {
  return graph.strength(graph.index_of(orgID));
}

// Batagelj & Zaversnik: nodes kept in degree-sorted order with bucket starts;
// processing a node fixes its core number and moves each higher-degree
// neighbour one bucket down.
std::vector<std::size_t> core_numbers(const CollabGraph& graph) {
  const std::size_t n = graph.node_count();
  std::vector<std::size_t> deg(n);
  std::size_t max_deg = 0;
  for (NodeIndex v = 0; v < n; ++v) {
    deg[v] = graph.degree(v);
    max_deg = std::max(max_deg, deg[v]);
  }

  std::vector<std::size_t> bin(max_deg + 1, 0);
  for (auto d : deg) ++bin[d];
  std::size_t start = 0;
  for (auto& b : bin) {
    const auto count = b;
    b = start;
    start += count;
  }

  std::vector<NodeIndex> vert(n);
  std::vector<std::size_t> pos(n);
  for (NodeIndex v = 0; v < n; ++v) {
    pos[v] = bin[deg[v]]++;
    vert[pos[v]] = v;
  }
  for (std::size_t d = max_deg; d > 0; --d) bin[d] = bin[d - 1];
  if (!bin.empty()) bin[0] = 0;

  for (std::size_t i = 0; i < n; ++i) {
    const NodeIndex v = vert[i];
    for (const auto& nb : graph.neighbors(v)) {
      const NodeIndex u = nb.node;
      if (deg[u] > deg[v]) {
        const std::size_t du = deg[u];
        const std::size_t pu = pos[u];
        const std::size_t pw = bin[du];
        const NodeIndex w = vert[pw];
        if (u != w) {
          pos[u] = pw;
          vert[pu] = w;
          pos[w] = pu;
          vert[pw] = u;
        }
        ++bin[du];
        --deg[u];
      }
    }
  }
  return deg;
}

std::unordered_map<std::string, std::size_t> coreness(const CollabGraph& graph) {
  const auto cores = core_numbers(graph);
  std::unordered_map<std::string, std::size_t> out;
  for (NodeIndex v = 0; v < graph.node_count(); ++v) out.emplace(graph.node(v).id, cores[v]);
  return out;
}

std::vector<CentralityRow> centrality_table(std::span<const CollabGraph> graphs) {
  std::vector<CentralityRow> rows;
  for (const auto& g : graphs) {
    const auto cores = core_numbers(g);
    for (NodeIndex v = 0; v < g.node_count(); ++v)
      rows.push_back({g.year(), g.node(v).id, g.degree(v), g.strength(v), cores[v],
                      g.node(v).participations});
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.year, a.orgID) < std::tie(b.year, b.orgID);
  });
  return rows;
}

std::vector<CentralityRange> centrality_ranges(std::span<const CentralityRow> rows) {
  std::map<int, CentralityRange> by_year;
  for (const auto& r : rows) {
    auto [it, fresh] = by_year.try_emplace(r.year);
    auto& range = it->second;
    if (fresh) {
      range = {r.year, 0, r.degree, r.degree, r.strength, r.strength, r.coreness, r.coreness};
    }
    ++range.nodes;
    range.minDegree = std::min(range.minDegree, r.degree);
    range.maxDegree = std::max(range.maxDegree, r.degree);
    range.minStrength = std::min(range.minStrength, r.strength);
    range.maxStrength = std::max(range.maxStrength, r.strength);
    range.minCoreness = std::min(range.minCoreness, r.coreness);
    range.maxCoreness = std::max(range.maxCoreness, r.coreness);
  }
  std::vector<CentralityRange> out;
  for (auto& [y, r] : by_year) out.push_back(r);
  return out;
}

void write_centrality_csv(std::ostream& out, std::span<const CentralityRow> rows) {
  csv::Writer w(out);
  w.row({"year", "orgID", "degree", "strength", "coreness", "participations"});
  for (const auto& r : rows)
    w.row({std::to_string(r.year), r.orgID, std::to_string(r.degree),
           csv::format_number(r.strength), std::to_string(r.coreness),
           std::to_string(r.participations)});
}

namespace {

template <typename T>
T to_number(const std::string& s) {
  T value{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw Error(ErrorKind::InvalidArgument, "bad number '" + s + "' in centrality table");
  return value;
}

}  // namespace

std::vector<CentralityRow> read_centrality_csv(const std::string& text) {
  const auto table = csv::parse(text, ',');
  std::vector<CentralityRow> rows;
  for (const auto& r : table.rows) {
    if (r.fields.size() != 6) throw Error(ErrorKind::InvalidArgument, "bad centrality row");
    rows.push_back({to_number<int>(r.fields[0]), r.fields[1], to_number<std::size_t>(r.fields[2]),
                    to_number<double>(r.fields[3]), to_number<std::size_t>(r.fields[4]),
                    to_number<int>(r.fields[5])});
  }
  return rows;
}

}  // namespace collabnet
