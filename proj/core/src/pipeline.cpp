#include "collabnet/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "collabnet/centrality.hpp"
#include "collabnet/csv.hpp"
#include "collabnet/error.hpp"
#include "collabnet/hashing.hpp"
#include "collabnet/rng.hpp"
#include "collabnet/temporal.hpp"

namespace collabnet {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

[[noreturn]] void bad_config(const std::string& what) {
  throw Error(ErrorKind::InvalidArgument, "config: " + what);
}

template <typename T, typename F>
T parse_enum(const json& j, const char* field, F from_string, T fallback) {
  if (!j.contains(field)) return fallback;
  const auto text = j.at(field).get<std::string>();
  auto v = from_string(text);
  if (!v) bad_config(fmt::format("unknown {} '{}'", field, text));
  return *v;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::uint64_t parse_seed(const json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc{} && p == s.data() + s.size()) return v;
  }
  bad_config("baseSeed must be a non-negative integer");
}

// ---- stage output handling ------------------------------------------------

// Outputs are collected in memory and written only once the stage has
// succeeded, so a fatal error leaves the stage directory untouched.
class Bundle {
 public:
  std::ostringstream& file(const std::string& name) {
    auto& s = files_[name];
    if (!s) s = std::make_unique<std::ostringstream>();
    return *s;
  }

  StageResult commit(const fs::path& dir, json manifest) const {
    fs::create_directories(dir);
    StageResult result;
    auto& listed = manifest["outputs"] = json::array();
    for (const auto& [name, stream] : files_) {
      const auto text = stream->str();
      std::ofstream(dir / name, std::ios::binary) << text;
      listed.push_back({{"file", name}, {"sha256", sha256_hex(text)}});
      result.outputs.push_back(name);
    }
    std::ofstream(dir / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
    result.outputs.push_back("manifest.json");
    return result;
  }

 private:
  std::map<std::string, std::unique_ptr<std::ostringstream>> files_;
};

std::string read_artifact(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingArtifact, "missing upstream artifact " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_manifest(const fs::path& dir) {
  const auto text = read_artifact(dir / "manifest.json");
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MissingArtifact,
                fmt::format("unreadable manifest {}: {}", (dir / "manifest.json").string(), e.what()));
  }
}

csv::Table read_table(const fs::path& path) { return csv::parse(read_artifact(path), ','); }

std::size_t column(const csv::Table& t, std::string_view name, const fs::path& path) {
  auto c = t.column({name});
  if (!c) throw Error(ErrorKind::MissingColumn, fmt::format("{}: no column '{}'", path.string(), name));
  return *c;
}

double to_double(const std::string& s) {
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

int to_int(const std::string& s) {
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

json upstream(const fs::path& dir, std::initializer_list<std::string_view> names) {
  json list = json::array();
  for (auto name : names) {
    const auto path = dir / name;
    list.push_back({{"file", path.filename().string()},
                    {"stage", dir.filename().string()},
                    {"sha256", sha256_hex(read_artifact(path))}});
  }
  return list;
}

json base_manifest(const RunConfig& config, std::string_view stage) {
  json m;
  m["schemaVersion"] = kSchemaVersion;
  m["stage"] = stage;
  m["config"] = json::parse(config_to_json(config));
  return m;
}

std::string seed_text(std::uint64_t s) { return std::to_string(s); }

}  // namespace

// ---- config ---------------------------------------------------------------

RunConfig parse_config(const std::string& text, const fs::path& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad_config(e.what());
  }
  RunConfig c;
  try {
    if (j.contains("programmes"))
      for (const auto& p : j.at("programmes")) {
        ProgrammeInput in;
        in.programme = parse_enum(p, "programme", programme_from_string, Programme::H2020);
        in.projects = resolve(base, p.at("projects").get<std::string>());
        in.organizations = resolve(base, p.at("organizations").get<std::string>());
        in.topics = resolve(base, p.at("topics").get<std::string>());
        c.programmes.push_back(std::move(in));
      }
    if (j.contains("labels") && !j.at("labels").is_null())
      c.labels = resolve(base, j.at("labels").get<std::string>());
    if (j.contains("delimiter")) {
      const auto d = j.at("delimiter").get<std::string>();
      if (d.size() != 1) bad_config("delimiter must be one character");
      c.delimiter = d.front();
    }
    if (j.contains("topics")) c.topics = j.at("topics").get<std::vector<std::string>>();
    c.basis = parse_enum(j, "basis", basis_from_string, c.basis);
    c.apportionment = parse_enum(j, "apportionment", apportionment_from_string, c.apportionment);
    c.projection = parse_enum(j, "projection", projection_from_string, c.projection);
    c.algorithm = parse_enum(j, "algorithm", algorithm_from_string, c.algorithm);
    if (j.contains("params")) {
      const auto& p = j.at("params");
      c.params.resolution = p.value("resolution", c.params.resolution);
      c.params.walkLength = p.value("walkLength", c.params.walkLength);
      c.params.maxSweeps = p.value("maxSweeps", c.params.maxSweeps);
      c.params.maxLevels = p.value("maxLevels", c.params.maxLevels);
    }
    if (j.contains("exploration")) {
      const auto& e = j.at("exploration");
      auto& x = c.exploration;
      x.tMax = e.value("tMax", x.tMax);
      x.stopPatience = e.value("stopPatience", x.stopPatience);
      x.intervalWidthTarget = e.value("intervalWidthTarget", x.intervalWidthTarget);
      x.credibleLevel = e.value("credibleLevel", x.credibleLevel);
      x.priorAlpha = e.value("priorAlpha", x.priorAlpha);
      x.priorBeta = e.value("priorBeta", x.priorBeta);
      x.workers = e.value("workers", x.workers);
    }
    c.dominanceThreshold = j.value("dominanceThreshold", c.dominanceThreshold);
    if (j.contains("consensus")) {
      const auto& k = j.at("consensus");
      c.consensus.threshold = k.value("threshold", c.consensus.threshold);
      c.consensus.weighting =
          parse_enum(k, "weighting", weighting_from_string, c.consensus.weighting);
    }
    c.theta = j.value("theta", c.theta);
    if (j.contains("topN") && !j.at("topN").is_null()) c.topN = j.at("topN").get<std::size_t>();
    if (j.contains("splitLabel") && !j.at("splitLabel").is_null())
      c.splitLabel = j.at("splitLabel").get<std::string>();
    if (j.contains("output")) c.output = resolve(base, j.at("output").get<std::string>());
    else if (!base.empty()) c.output = base / c.output;
    if (j.contains("baseSeed")) c.baseSeed = parse_seed(j.at("baseSeed"));
  } catch (const json::exception& e) {
    bad_config(e.what());
  }
  check(c.exploration);
  if (c.theta <= 0.0 || c.theta >= 1.0) bad_config("theta must lie in (0, 1)");
  if (c.consensus.threshold <= 0.0 || c.consensus.threshold >= 1.0)
    bad_config("consensus threshold must lie in (0, 1)");
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingInput, "cannot open config " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return parse_config(s.str(), path.parent_path());
}

std::string config_to_json(const RunConfig& c) {
  json j;
  auto& progs = j["programmes"] = json::array();
  for (const auto& p : c.programmes)
    progs.push_back({{"programme", to_string(p.programme)},
                     {"projects", p.projects.generic_string()},
                     {"organizations", p.organizations.generic_string()},
                     {"topics", p.topics.generic_string()}});
  j["labels"] = c.labels ? json(c.labels->generic_string()) : json(nullptr);
  j["delimiter"] = std::string(1, c.delimiter);
  j["topics"] = c.topics;
  j["basis"] = to_string(c.basis);
  j["apportionment"] = to_string(c.apportionment);
  j["projection"] = to_string(c.projection);
  j["algorithm"] = to_string(c.algorithm);
  j["params"] = {{"resolution", c.params.resolution},
                 {"walkLength", c.params.walkLength},
                 {"maxSweeps", c.params.maxSweeps},
                 {"maxLevels", c.params.maxLevels}};
  const auto& x = c.exploration;
  j["exploration"] = {{"tMax", x.tMax},
                      {"stopPatience", x.stopPatience},
                      {"intervalWidthTarget", x.intervalWidthTarget},
                      {"credibleLevel", x.credibleLevel},
                      {"priorAlpha", x.priorAlpha},
                      {"priorBeta", x.priorBeta},
                      {"workers", x.workers}};
  j["dominanceThreshold"] = c.dominanceThreshold;
  j["consensus"] = {{"threshold", c.consensus.threshold},
                    {"weighting", to_string(c.consensus.weighting)}};
  j["theta"] = c.theta;
  j["topN"] = c.topN ? json(*c.topN) : json(nullptr);
  j["splitLabel"] = c.splitLabel ? json(*c.splitLabel) : json(nullptr);
  j["output"] = c.output.generic_string();
  j["baseSeed"] = seed_text(c.baseSeed);
  return j.dump(2);
}

fs::path stage_dir(const RunConfig& config, std::string_view stage) {
  return config.output / std::string(stage);
}

// ---- ingest ---------------------------------------------------------------

StageResult cmd_ingest(const RunConfig& config) {
  if (config.programmes.empty())
    throw Error(ErrorKind::InvalidArgument, "config lists no programme inputs");

  json inputs = json::array();
  auto checksum = [&](const fs::path& p) {
    inputs.push_back({{"path", p.generic_string()}, {"sha256", sha256_file(p)}});
  };

  std::optional<TableSet> tables;
  for (const auto& p : config.programmes) {
    auto t = parse_tables({p.projects, p.organizations, p.topics}, p.programme,
                          ParseOptions{config.delimiter});
    checksum(p.projects);
    checksum(p.organizations);
    checksum(p.topics);
    tables = tables ? merge_programmes(std::move(*tables), std::move(t)) : std::move(t);
  }
  if (config.labels) {
    std::vector<Reject> rejects;
    auto labels = parse_labels(*config.labels, rejects);
    checksum(*config.labels);
    tables->rejects.insert(tables->rejects.end(), rejects.begin(), rejects.end());
    *tables = attach_labels(std::move(*tables), labels);
  }
  if (!config.topics.empty()) {
    auto filtered = filter_by_topic(*tables, {config.topics.begin(), config.topics.end()});
    tables = std::move(filtered);
  }
  auto& t = *tables;
  auto matrices = compute_weights(t, {config.basis, config.apportionment}, &t.log);

  Bundle out;
  {
    csv::Writer w(out.file("projects.csv"));
    w.row({"projID", "acronym", "title", "startDate", "endDate", "callID", "programme"});
    for (const auto& p : t.projects)
      w.row({p.projID, p.acronym, p.title, format_date(p.startDate), format_date(p.endDate),
             p.callID, to_string(p.programme)});
  }
  {
    csv::Writer w(out.file("participations.csv"));
    w.row({"orgID", "projID", "orgName", "countryCode", "role", "totalCost", "netEcContribution"});
    for (const auto& r : t.participations)
      w.row({r.orgID, r.projID, r.orgName, r.countryCode, to_string(r.role),
             csv::format_number(r.totalCost), csv::format_number(r.netEcContribution)});
  }
  {
    csv::Writer w(out.file("topics.csv"));
    w.row({"projID", "topicLabel"});
    for (const auto& r : t.topics) w.row({r.projID, r.topicLabel});
  }
  {
    csv::Writer w(out.file("labels.csv"));
    w.row({"projID", "label", "value"});
    for (const auto& p : t.projects)
      for (const auto& [name, value] : p.labels) w.row({p.projID, name, value ? "true" : "false"});
  }
  {
    csv::Writer w(out.file("rejects.csv"));
    w.row({"table", "line", "reason"});
    for (const auto& r : t.rejects) w.row({r.table, std::to_string(r.line), r.reason});
  }
  json years = json::array();
  {
    csv::Writer w(out.file("weights.csv"));
    w.row({"year", "orgID", "projID", "weight"});
    for (const auto& m : matrices) {
      years.push_back({{"year", m.year}, {"entries", m.entries.size()}, {"total", m.total()}});
      for (const auto& [key, v] : m.entries)
        w.row({std::to_string(m.year), key.first, key.second, csv::format_number(v)});
    }
  }

  auto manifest = base_manifest(config, "ingest");
  manifest["inputs"] = inputs;
  manifest["basis"] = to_string(config.basis);
  manifest["unit"] = "kEUR";
  manifest["topicFilter"] = config.topics;
  json counts;
  for (const auto& [table, c] : t.counts)
    counts[table] = {{"in", c.in}, {"accepted", c.accepted}, {"rejected", c.rejected}};
  manifest["rowCounts"] = counts;
  manifest["rejects"] = t.rejects.size();
  manifest["years"] = years;
  manifest["log"] = t.log;
  return out.commit(stage_dir(config, "ingest"), manifest);
}

// ---- analyze --------------------------------------------------------------

namespace {

struct IngestData {
  std::vector<WeightMatrix> matrices;
  OrgDirectory directory;
  std::unordered_map<std::string, std::map<std::string, bool>> labels;  // projID -> label -> value
};

IngestData load_ingest(const RunConfig& config) {
  const auto dir = stage_dir(config, "ingest");
  const auto manifest = read_manifest(dir);
  IngestData d;
  std::map<int, std::size_t> slot;
  for (const auto& y : manifest.at("years")) {
    WeightMatrix m;
    m.year = y.at("year").get<int>();
    m.basis = config.basis;
    slot[m.year] = d.matrices.size();
    d.matrices.push_back(std::move(m));
  }

  const auto wpath = dir / "weights.csv";
  const auto w = read_table(wpath);
  const auto cy = column(w, "year", wpath), co = column(w, "orgID", wpath),
             cp = column(w, "projID", wpath), cw = column(w, "weight", wpath);
  for (const auto& r : w.rows) {
    auto it = slot.find(to_int(r.fields.at(cy)));
    if (it == slot.end())
      throw Error(ErrorKind::MissingArtifact, fmt::format("{}: year not in manifest", wpath.string()));
    d.matrices[it->second].entries[{r.fields.at(co), r.fields.at(cp)}] = to_double(r.fields.at(cw));
  }

  const auto ppath = dir / "participations.csv";
  const auto p = read_table(ppath);
  const auto po = column(p, "orgID", ppath), pn = column(p, "orgName", ppath),
             pc = column(p, "countryCode", ppath);
  for (const auto& r : p.rows)
    d.directory.emplace(r.fields.at(po), OrgInfo{r.fields.at(pn), r.fields.at(pc)});

  if (config.splitLabel) {
    const auto lpath = dir / "labels.csv";
    const auto l = read_table(lpath);
    const auto lp = column(l, "projID", lpath), ln = column(l, "label", lpath),
               lv = column(l, "value", lpath);
    for (const auto& r : l.rows) d.labels[r.fields.at(lp)][r.fields.at(ln)] = r.fields.at(lv) == "true";
  }
  return d;
}

json ranges_json(std::span<const CentralityRange> ranges) {
  json a = json::array();
  for (const auto& r : ranges)
    a.push_back({{"year", r.year},
                 {"nodes", r.nodes},
                 {"degree", {r.minDegree, r.maxDegree}},
                 {"strength", {r.minStrength, r.maxStrength}},
                 {"coreness", {r.minCoreness, r.maxCoreness}}});
  return a;
}

}  // namespace

StageResult cmd_analyze(const RunConfig& config) {
  check(config.exploration);
  const auto in = load_ingest(config);

  Bundle out;
  std::vector<std::string> log, failures;
  std::vector<CollabGraph> graphs;
  for (const auto& m : in.matrices) {
    graphs.push_back(project_one_mode(m, config.projection, &in.directory, &log));
    const auto& g = graphs.back();
    write_graphml(out.file(fmt::format("graph_{}.graphml", m.year)), g);
    write_edge_list(out.file(fmt::format("edges_{}.csv", m.year)), g);
  }

  {
    csv::Writer w(out.file("network.csv"));
    w.row({"year", "nodes", "edges", "edgeWeight", "soloWeight"});
    for (const auto& g : graphs)
      w.row({std::to_string(g.year()), std::to_string(g.node_count()),
             std::to_string(g.edge_count()), csv::format_number(g.total_edge_weight()),
             csv::format_number(g.total_solo_weight())});
  }

  const auto table = centrality_table(graphs);
  write_centrality_csv(out.file("centrality.csv"), table);
  out.file("centrality_ranges.json") << ranges_json(centrality_ranges(table)).dump(2) << '\n';

  std::vector<Partition> partitions;
  json years = json::array(), failed = json::array();
  csv::Writer selection(out.file("selection.csv"));
  selection.row({"year", "method", "partitionKey", "communities", "uniqueSolutions", "trials",
                 "failedTrials", "modularity", "valid"});
  for (const auto& g : graphs) {
    const int year = g.year();
    if (g.node_count() == 0) {
      log.push_back(fmt::format("{}: empty network, no community detection", year));
      years.push_back(year);
      continue;
    }
    try {
      const auto seed = derive_seed(config.baseSeed, static_cast<std::uint64_t>(year));
      auto space = explore(g, config.algorithm, config.params, config.exploration, seed);
      space.year = year;
      auto chosen = select_partition(space, g, config.dominanceThreshold, config.consensus);
      chosen.partition.year = year;
      chosen.partition.algorithm = config.algorithm;
      chosen.partition.seed = seed;
      const auto report = validate(g, chosen.partition);

      write_solution_space_json(out.file(fmt::format("solution_space_{}.json", year)), space);
      write_probability_bands(out.file(fmt::format("bands_{}.csv", year)), space);
      write_solution_frequencies(out.file(fmt::format("solutions_{}.csv", year)), space);
      write_community_sizes(out.file(fmt::format("community_sizes_{}.csv", year)), space);
      write_pairwise_similarity(out.file(fmt::format("similarity_{}.csv", year)), space);
      write_validity_json(out.file(fmt::format("validity_{}.json", year)), report);

      selection.row({std::to_string(year), to_string(chosen.method), chosen.partition.key(),
                     std::to_string(chosen.partition.community_count()),
                     std::to_string(space.entries.size()), std::to_string(space.trials),
                     std::to_string(space.failed),
                     csv::format_number(modularity(g, chosen.partition, config.params.resolution)),
                     report.valid ? "true" : "false"});
      partitions.push_back(std::move(chosen.partition));
      years.push_back(year);
    } catch (const Error& e) {
      failures.push_back(fmt::format("{}: {} ({})", year, e.what(), to_string(e.kind())));
      failed.push_back({{"year", year}, {"kind", to_string(e.kind())}, {"message", e.what()}});
    }
  }
  write_partition_csv(out.file("partitions.csv"), partitions);

  if (config.splitLabel) {
    std::unordered_map<std::string, LabelValue> labels;
    for (const auto& [proj, named] : in.labels)
      if (auto it = named.find(*config.splitLabel); it != named.end())
        labels[proj] = it->second ? LabelValue::True : LabelValue::False;
    std::vector<CollabGraph> yes, no;
    std::size_t unknown = 0;
    for (const auto& m : in.matrices) {
      auto split = split_by_label(m, labels);
      unknown += split.unknownProjects;
      yes.push_back(project_one_mode(split.whenTrue, config.projection, &in.directory));
      no.push_back(project_one_mode(split.whenFalse, config.projection, &in.directory));
    }
    write_centrality_csv(out.file(fmt::format("centrality_{}_true.csv", *config.splitLabel)),
                         centrality_table(yes));
    write_centrality_csv(out.file(fmt::format("centrality_{}_false.csv", *config.splitLabel)),
                         centrality_table(no));
    log.push_back(fmt::format("label '{}': {} project-year matrices without a label value",
                              *config.splitLabel, unknown));
  }

  auto manifest = base_manifest(config, "analyze");
  manifest["upstream"] = upstream(stage_dir(config, "ingest"),
                                  {"manifest.json", "weights.csv", "participations.csv"});
  manifest["years"] = years;
  manifest["failedYears"] = failed;
  manifest["log"] = log;
  auto result = out.commit(stage_dir(config, "analyze"), manifest);
  result.failures = failures;
  if (!failures.empty()) result.code = ExitCode::Partial;
  return result;
}

// ---- temporal -------------------------------------------------------------

StageResult cmd_temporal(const RunConfig& config) {
  const auto dir = stage_dir(config, "analyze");
  const auto manifest = read_manifest(dir);
  auto stored = read_partition_csv(read_artifact(dir / "partitions.csv"));
  const auto centrality = read_centrality_csv(read_artifact(dir / "centrality.csv"));

  std::map<int, Partition> by_year;
  for (const auto& y : manifest.at("years")) {
    Partition empty;
    empty.year = y.get<int>();
    by_year.emplace(empty.year, std::move(empty));
  }
  for (auto& p : stored) {
    if (!by_year.contains(p.year))
      throw Error(ErrorKind::MissingArtifact,
                  fmt::format("partitions.csv has year {} not listed in the manifest", p.year));
    by_year[p.year] = std::move(p);
  }
  std::set<int> failed;
  for (const auto& f : manifest.at("failedYears")) failed.insert(f.at("year").get<int>());
  if (by_year.size() < 2)
    throw Error(ErrorKind::MissingYear, "temporal analysis needs partitions for at least two years");
  const int first = by_year.begin()->first, last = by_year.rbegin()->first;
  for (int y = first; y <= last; ++y)
    if (!by_year.contains(y))
      throw Error(ErrorKind::MissingYear,
                  fmt::format("no partition for year {}{}", y,
                              failed.contains(y) ? " (analysis failed for that year)" : ""));

  std::vector<Partition> partitions;
  for (auto& [year, p] : by_year) partitions.push_back(std::move(p));

  std::vector<std::vector<LineageEvent>> events;
  std::vector<LineageEvent> all, matrix;
  for (std::size_t i = 0; i + 1 < partitions.size(); ++i) {
    events.push_back(match_communities(partitions[i], partitions[i + 1], config.theta));
    all.insert(all.end(), events.back().begin(), events.back().end());
    auto full = event_matrix(partitions[i], partitions[i + 1], config.theta);
    matrix.insert(matrix.end(), full.begin(), full.end());
  }
  const auto labels = assign_global_labels(partitions, events);
  const auto series = community_series(labels, partitions, centrality, config.topN);

  Bundle out;
  write_events_csv(out.file("events.csv"), all);
  write_events_csv(out.file("event_matrix.csv"), matrix);
  write_label_map_csv(out.file("labels.csv"), labels);
  write_label_log_csv(out.file("label_log.csv"), labels);
  write_series_csv(out.file("series.csv"), series);

  auto m = base_manifest(config, "temporal");
  m["upstream"] = upstream(dir, {"manifest.json", "partitions.csv", "centrality.csv"});
  m["years"] = {first, last};
  m["globalLabels"] = labels.created.size();
  m["log"] = labels.log;
  return out.commit(stage_dir(config, "temporal"), m);
}

// ---- report ---------------------------------------------------------------

StageResult cmd_report(const RunConfig& config) {
  const auto analyze = stage_dir(config, "analyze");
  const auto temporal = stage_dir(config, "temporal");
  const auto network = read_table(analyze / "network.csv");
  const auto centrality = read_centrality_csv(read_artifact(analyze / "centrality.csv"));
  const auto selection = read_table(analyze / "selection.csv");
  const auto series_text = read_artifact(temporal / "series.csv");
  const auto labels_text = read_artifact(temporal / "label_log.csv");

  Bundle out;
  json report;
  report["schemaVersion"] = kSchemaVersion;
  report["basis"] = to_string(config.basis);
  report["unit"] = "kEUR";
  report["algorithm"] = to_string(config.algorithm);

  auto& years = report["years"] = json::array();
  {
    const auto path = analyze / "network.csv";
    const auto y = column(network, "year", path), n = column(network, "nodes", path),
               e = column(network, "edges", path), ew = column(network, "edgeWeight", path),
               sw = column(network, "soloWeight", path);
    csv::Writer w(out.file("network_sizes.csv"));
    w.row({"year", "nodes", "edges", "totalWeight"});
    for (const auto& r : network.rows) {
      const double total = to_double(r.fields.at(ew)) + to_double(r.fields.at(sw));
      w.row({r.fields.at(y), r.fields.at(n), r.fields.at(e), csv::format_number(total)});
      years.push_back({{"year", to_int(r.fields.at(y))},
                       {"nodes", to_int(r.fields.at(n))},
                       {"edges", to_int(r.fields.at(e))},
                       {"totalWeight", total}});
    }
  }
  {
    std::map<std::pair<int, std::size_t>, std::size_t> bands;
    for (const auto& r : centrality) ++bands[{r.year, r.coreness}];
    csv::Writer w(out.file("coreness_bands.csv"));
    w.row({"year", "coreness", "organisations"});
    for (const auto& [key, count] : bands)
      w.row({std::to_string(key.first), std::to_string(key.second), std::to_string(count)});
  }
  {
    auto rows = centrality;
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return std::tie(a.orgID, a.year) < std::tie(b.orgID, b.year);
    });
    csv::Writer w(out.file("trajectories.csv"));
    w.row({"orgID", "year", "degree", "strength", "coreness"});
    for (const auto& r : rows)
      w.row({r.orgID, std::to_string(r.year), std::to_string(r.degree),
             csv::format_number(r.strength), std::to_string(r.coreness)});
  }
  out.file("series.csv") << series_text;
  {
    const auto path = analyze / "selection.csv";
    const auto y = column(selection, "year", path), m = column(selection, "method", path),
               k = column(selection, "partitionKey", path),
               u = column(selection, "uniqueSolutions", path),
               c = column(selection, "communities", path);
    csv::Writer w(out.file("solution_summary.csv"));
    w.row(selection.header);
    auto& sol = report["solutions"] = json::array();
    for (const auto& r : selection.rows) {
      w.row(r.fields);
      sol.push_back({{"year", to_int(r.fields.at(y))},
                     {"method", r.fields.at(m)},
                     {"partitionKey", r.fields.at(k)},
                     {"uniqueSolutions", to_int(r.fields.at(u))},
                     {"communities", to_int(r.fields.at(c))}});
    }
  }
  report["globalLabels"] = csv::parse(labels_text, ',').rows.size();
  report["files"] = {"network_sizes.csv", "coreness_bands.csv", "trajectories.csv", "series.csv",
                     "solution_summary.csv"};
  const auto text = report.dump(2);
  if (auto problems = validate_report_json(text); !problems.empty())
    throw Error(ErrorKind::InvalidArgument, "report schema: " + problems.front());
  out.file("report.json") << text << '\n';

  auto m = base_manifest(config, "report");
  auto up = upstream(analyze, {"network.csv", "centrality.csv", "selection.csv"});
  for (auto& u : upstream(temporal, {"series.csv", "label_log.csv"})) up.push_back(u);
  m["upstream"] = up;
  return out.commit(stage_dir(config, "report"), m);
}

std::vector<std::string> validate_report_json(const std::string& text) {
  std::vector<std::string> problems;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    return {e.what()};
  }
  auto need = [&](const json& obj, const char* key, auto check, const char* type,
                  const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(fmt::format("{}: missing '{}'", where, key));
      return;
    }
    if (!check(obj.at(key))) problems.push_back(fmt::format("{}: '{}' is not {}", where, key, type));
  };
  auto integer = [](const json& v) { return v.is_number_integer(); };
  auto number = [](const json& v) { return v.is_number(); };
  auto string = [](const json& v) { return v.is_string(); };
  auto array = [](const json& v) { return v.is_array(); };

  need(j, "schemaVersion", [](const json& v) { return v == kSchemaVersion; }, "1", "report");
  need(j, "basis", string, "a string", "report");
  need(j, "unit", string, "a string", "report");
  need(j, "algorithm", string, "a string", "report");
  need(j, "globalLabels", integer, "an integer", "report");
  need(j, "years", array, "an array", "report");
  need(j, "solutions", array, "an array", "report");
  need(j, "files", array, "an array", "report");
  if (!problems.empty()) return problems;

  for (std::size_t i = 0; i < j["years"].size(); ++i) {
    const auto where = fmt::format("years[{}]", i);
    const auto& y = j["years"][i];
    need(y, "year", integer, "an integer", where);
    need(y, "nodes", integer, "an integer", where);
    need(y, "edges", integer, "an integer", where);
    need(y, "totalWeight", number, "a number", where);
  }
  for (std::size_t i = 0; i < j["solutions"].size(); ++i) {
    const auto where = fmt::format("solutions[{}]", i);
    const auto& s = j["solutions"][i];
    need(s, "year", integer, "an integer", where);
    need(s, "method", string, "a string", where);
    need(s, "partitionKey", string, "a string", where);
    need(s, "uniqueSolutions", integer, "an integer", where);
    need(s, "communities", integer, "an integer", where);
  }
  for (const auto& f : j["files"])
    if (!f.is_string()) problems.push_back("files: entry is not a string");
  return problems;
}

}  // namespace collabnet
