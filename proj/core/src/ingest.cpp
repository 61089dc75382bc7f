#include "collabnet/ingest.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <unordered_map>
#include <unordered_set>

#include "collabnet/csv.hpp"
#include "collabnet/error.hpp"

namespace collabnet {

namespace chr = std::chrono;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

/// Parses a monetary amount; accepts "1234.5" and the comma-decimal "1234,5".
std::optional<double> parse_amount(std::string_view raw) {
  std::string text = trim(raw);
  if (text.empty()) return std::nullopt;
  if (text.find(',') != std::string::npos && text.find('.') == std::string::npos)
    std::replace(text.begin(), text.end(), ',', '.');
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::size_t require(const csv::Table& table, std::initializer_list<std::string_view> names,
                    const std::filesystem::path& path) {
  if (auto idx = table.column(names)) return *idx;
  throw Error(ErrorKind::MissingColumn,
              fmt::format("{}: missing required column '{}'", path.string(), *names.begin()));
}

std::string field(const csv::Row& row, std::optional<std::size_t> idx) {
  if (!idx || *idx >= row.fields.size()) return {};
  return trim(row.fields[*idx]);
}

struct TableReader {
  TableSet& out;
  std::string name;

  RowCounts& counts() { return out.counts[name]; }
  void reject(const csv::Row& row, std::string reason) {
    ++counts().rejected;
    out.rejects.push_back({name, row.line, std::move(reason)});
  }
  void accept() { ++counts().accepted; }
};

void check_exists(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path))
    throw Error(ErrorKind::MissingInput, "missing input file " + path.string());
}

void read_projects(const std::filesystem::path& path, Programme programme, char delimiter,
                   TableSet& out) {
  const auto table = csv::read(path, delimiter);
  const auto c_id = require(table, {"projID", "id"}, path);
  const auto c_acr = require(table, {"acronym"}, path);
  const auto c_title = require(table, {"title"}, path);
  const auto c_start = require(table, {"startDate"}, path);
  const auto c_end = require(table, {"endDate"}, path);
  const auto c_call = table.column({"callID", "masterCall"});
  const auto c_obj = table.column({"objectiveText", "objective"});

  TableReader reader{out, "projects"};
  std::unordered_set<std::string> seen;
  for (const auto& row : table.rows) {
    ++reader.counts().in;
    if (row.fields.size() != table.header.size()) {
      reader.reject(row, "field count");
      continue;
    }
    ProjectRecord p;
    p.projID = field(row, c_id);
    if (p.projID.empty()) {
      reader.reject(row, "missing key");
      continue;
    }
    auto start = parse_date(field(row, c_start));
    auto end = parse_date(field(row, c_end));
    if (!start || !end) {
      reader.reject(row, "bad date");
      continue;
    }
    if (chr::sys_days{*end} < chr::sys_days{*start}) {
      reader.reject(row, "date order");
      continue;
    }
    if (!seen.insert(p.projID).second) {
      reader.reject(row, "duplicate key");
      continue;
    }
    p.acronym = field(row, c_acr);
    p.title = field(row, c_title);
    p.startDate = *start;
    p.endDate = *end;
    p.callID = field(row, c_call);
    p.objectiveText = field(row, c_obj);
    p.programme = programme;
    out.projects.push_back(std::move(p));
    reader.accept();
  }
}

std::optional<Role> parse_role(std::string_view text, bool& mapped) {
  const auto r = lower(text);
  mapped = false;
  if (r == "coordinator") return Role::Coordinator;
  if (r == "participant") return Role::Participant;
  if (r == "associatedpartner" || r == "associated partner") return Role::AssociatedPartner;
  if (r.empty()) return std::nullopt;
  mapped = true;
  return Role::Participant;
}

void read_participations(const std::filesystem::path& path, char delimiter, TableSet& out) {
  const auto table = csv::read(path, delimiter);
  const auto c_proj = require(table, {"projID", "projectID"}, path);
  const auto c_org = require(table, {"orgID", "organisationID", "organizationID"}, path);
  const auto c_name = require(table, {"orgName", "name"}, path);
  const auto c_country = require(table, {"countryCode", "country"}, path);
  const auto c_role = require(table, {"role"}, path);
  const auto c_total = require(table, {"totalCost"}, path);
  const auto c_net = require(table, {"netEcContribution"}, path);

  TableReader reader{out, "participations"};
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& row : table.rows) {
    ++reader.counts().in;
    if (row.fields.size() != table.header.size()) {
      reader.reject(row, "field count");
      continue;
    }
    ParticipationRecord r;
    r.orgID = field(row, c_org);
    r.projID = field(row, c_proj);
    if (r.orgID.empty() || r.projID.empty()) {
      reader.reject(row, "missing key");
      continue;
    }
    bool mapped = false;
    auto role = parse_role(field(row, c_role), mapped);
    if (!role) {
      reader.reject(row, "missing role");
      continue;
    }
    auto total = parse_amount(field(row, c_total));
    auto net = parse_amount(field(row, c_net));
    if (!total || !net) {
      reader.reject(row, "missing value");
      continue;
    }
    if (*total < 0 || *net < 0) {
      reader.reject(row, "negative value");
      continue;
    }
    if (!seen.emplace(r.orgID, r.projID).second) {
      reader.reject(row, "duplicate key");
      continue;
    }
    if (mapped)
      out.log.push_back(fmt::format("participations line {}: role '{}' mapped to participant",
                                    row.line, field(row, c_role)));
    if (*net > *total)
      out.log.push_back(fmt::format(
          "participations line {}: netEcContribution {} exceeds totalCost {} for ({}, {})",
          row.line, *net, *total, r.orgID, r.projID));
    r.orgName = field(row, c_name);
    r.countryCode = field(row, c_country);
    r.role = *role;
    r.totalCost = *total;
    r.netEcContribution = *net;
    out.participations.push_back(std::move(r));
    reader.accept();
  }
}

void read_topics(const std::filesystem::path& path, char delimiter, TableSet& out) {
  const auto table = csv::read(path, delimiter);
  const auto c_proj = require(table, {"projID", "projectID"}, path);
  const auto c_topic = require(table, {"topicLabel", "euroSciVocTitle", "topic"}, path);

  TableReader reader{out, "topics"};
  std::set<TopicRecord> seen;
  for (const auto& row : table.rows) {
    ++reader.counts().in;
    if (row.fields.size() != table.header.size()) {
      reader.reject(row, "field count");
      continue;
    }
    TopicRecord t{field(row, c_proj), field(row, c_topic)};
    if (t.projID.empty() || t.topicLabel.empty()) {
      reader.reject(row, "missing key");
      continue;
    }
    if (!seen.insert(t).second) {
      reader.reject(row, "duplicate key");
      continue;
    }
    out.topics.push_back(std::move(t));
    reader.accept();
  }
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  const auto s = trim(text);
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (s.size() > 10 && s[10] != ' ' && s[10] != 'T') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto num = [&](std::size_t pos, std::size_t len, auto& v) {
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
    return ec == std::errc{} && p == s.data() + pos + len;
  };
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
  Date date{chr::year{y}, chr::month{m}, chr::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(Date date) {
  return fmt::format("{:04}-{:02}-{:02}", static_cast<int>(date.year()),
                     static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
}

const char* to_string(Programme p) {
  return p == Programme::H2020 ? "H2020" : "HorizonEurope";
}

const char* to_string(Role r) {
  switch (r) {
    case Role::Coordinator: return "coordinator";
    case Role::Participant: return "participant";
    case Role::AssociatedPartner: return "associatedPartner";
  }
  return "participant";
}

const char* to_string(WeightBasis b) {
  return b == WeightBasis::NetEcContribution ? "netEcContribution" : "totalCost";
}

const char* to_string(Apportionment a) {
  return a == Apportionment::ByDuration ? "duration" : "per365";
}

std::optional<Programme> programme_from_string(std::string_view s) {
  const auto l = lower(s);
  if (l == "h2020") return Programme::H2020;
  if (l == "horizoneurope" || l == "he") return Programme::HorizonEurope;
  return std::nullopt;
}

std::optional<WeightBasis> basis_from_string(std::string_view s) {
  const auto l = lower(s);
  if (l == "netec" || l == "neteccontribution") return WeightBasis::NetEcContribution;
  if (l == "totalcost") return WeightBasis::TotalCost;
  return std::nullopt;
}

std::optional<Apportionment> apportionment_from_string(std::string_view s) {
  const auto l = lower(s);
  if (l == "duration") return Apportionment::ByDuration;
  if (l == "per365") return Apportionment::Per365;
  return std::nullopt;
}

LabelValue ProjectRecord::label(const std::string& name) const {
  auto it = labels.find(name);
  if (it == labels.end()) return LabelValue::Unknown;
  return it->second ? LabelValue::True : LabelValue::False;
}

bool ProjectRecord::same_content(const ProjectRecord& o) const {
  return projID == o.projID && acronym == o.acronym && title == o.title &&
         startDate == o.startDate && endDate == o.endDate && callID == o.callID &&
         objectiveText == o.objectiveText;
}

const ProjectRecord* TableSet::find_project(const std::string& projID) const {
  for (const auto& p : projects)
    if (p.projID == projID) return &p;
  return nullptr;
}

TableSet parse_tables(const TablePaths& paths, Programme programme, const ParseOptions& options) {
  check_exists(paths.projects);
  check_exists(paths.organizations);
  check_exists(paths.topics);

  TableSet out;
  out.counts["projects"];
  out.counts["participations"];
  out.counts["topics"];
  read_projects(paths.projects, programme, options.delimiter, out);
  read_participations(paths.organizations, options.delimiter, out);
  read_topics(paths.topics, options.delimiter, out);
  return out;
}

// Projects with the same projID in both sets are deduplicated when their
// content is identical; otherwise both are kept and the second one is renamed
// "<projID>@<programme>" together with its participation and topic rows.
TableSet merge_programmes(TableSet a, TableSet b) {
  TableSet out = std::move(a);

  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < out.projects.size(); ++i) by_id.emplace(out.projects[i].projID, i);

  std::unordered_map<std::string, std::string> renamed;
  for (auto& p : b.projects) {
    auto it = by_id.find(p.projID);
    if (it == by_id.end()) {
      by_id.emplace(p.projID, out.projects.size());
      out.projects.push_back(std::move(p));
      continue;
    }
    if (out.projects[it->second].same_content(p)) {
      out.log.push_back(fmt::format("merge: duplicate project {} deduplicated", p.projID));
      continue;
    }
    std::string fresh = fmt::format("{}@{}", p.projID, to_string(p.programme));
    out.log.push_back(fmt::format(
        "merge: projID collision {} with differing content; second kept as {}", p.projID, fresh));
    renamed.emplace(p.projID, fresh);
    p.projID = fresh;
    by_id.emplace(fresh, out.projects.size());
    out.projects.push_back(std::move(p));
  }

  auto remap = [&](std::string& projID) {
    if (auto it = renamed.find(projID); it != renamed.end()) projID = it->second;
  };

  std::set<std::pair<std::string, std::string>> participation_keys;
  for (const auto& r : out.participations) participation_keys.emplace(r.orgID, r.projID);
  for (auto& r : b.participations) {
    remap(r.projID);
    if (!participation_keys.emplace(r.orgID, r.projID).second) {
      out.log.push_back(fmt::format("merge: duplicate participation ({}, {}) deduplicated",
                                    r.orgID, r.projID));
      continue;
    }
    out.participations.push_back(std::move(r));
  }

  std::set<TopicRecord> topic_keys(out.topics.begin(), out.topics.end());
  for (auto& t : b.topics) {
    remap(t.projID);
    if (topic_keys.insert(t).second) out.topics.push_back(std::move(t));
  }

  out.rejects.insert(out.rejects.end(), b.rejects.begin(), b.rejects.end());
  for (const auto& [name, c] : b.counts) {
    auto& dst = out.counts[name];
    dst.in += c.in;
    dst.accepted += c.accepted;
    dst.rejected += c.rejected;
  }
  out.log.insert(out.log.end(), b.log.begin(), b.log.end());
  return out;
}

TableSet filter_by_topic(const TableSet& tables, const std::set<std::string>& topics) {
  if (topics.empty()) throw Error(ErrorKind::InvalidArgument, "topic filter is empty");

  std::unordered_set<std::string> keep;
  for (const auto& t : tables.topics)
    if (topics.contains(t.topicLabel)) keep.insert(t.projID);

  TableSet out;
  out.rejects = tables.rejects;
  out.counts = tables.counts;
  out.log = tables.log;
  for (const auto& p : tables.projects)
    if (keep.contains(p.projID)) out.projects.push_back(p);
  for (const auto& r : tables.participations)
    if (keep.contains(r.projID)) out.participations.push_back(r);
  for (const auto& t : tables.topics)
    if (keep.contains(t.projID)) out.topics.push_back(t);

  if (out.projects.empty())
    out.log.push_back("filter: no project carries any of the selected topics");
  return out;
}

std::vector<EnrichmentLabel> parse_labels(const std::filesystem::path& path,
                                          std::vector<Reject>& rejects, char delimiter) {
  check_exists(path);
  const auto table = csv::read(path, delimiter);
  const auto c_proj = require(table, {"projID", "projectID"}, path);
  const auto c_label = require(table, {"label", "labelName"}, path);
  const auto c_value = require(table, {"value"}, path);

  std::vector<EnrichmentLabel> out;
  for (const auto& row : table.rows) {
    EnrichmentLabel l{field(row, c_proj), field(row, c_label), false};
    const auto v = lower(field(row, c_value));
    if (l.projID.empty() || l.labelName.empty()) {
      rejects.push_back({"labels", row.line, "missing key"});
      continue;
    }
    if (v != "true" && v != "false") {
      rejects.push_back({"labels", row.line, "bad value"});
      continue;
    }
    l.value = v == "true";
    out.push_back(std::move(l));
  }
  return out;
}

TableSet attach_labels(TableSet tables, const std::vector<EnrichmentLabel>& labels) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < tables.projects.size(); ++i)
    by_id.emplace(tables.projects[i].projID, i);

  for (const auto& l : labels) {
    auto it = by_id.find(l.projID);
    if (it == by_id.end()) {
      tables.log.push_back(
          fmt::format("labels: projID {} not in tables; label {} skipped", l.projID, l.labelName));
      continue;
    }
    auto [pos, inserted] = tables.projects[it->second].labels.emplace(l.labelName, l.value);
    if (!inserted)
      tables.log.push_back(fmt::format("labels: duplicate ({}, {}) ignored", l.projID, l.labelName));
  }
  return tables;
}

double WeightMatrix::total() const {
  double sum = 0.0;
  for (const auto& [key, w] : entries) sum += w;
  return sum;
}

long duration_days(Date start, Date end) {
  return (chr::sys_days{end} - chr::sys_days{start}).count() + 1;
}

long days_in_year(Date start, Date end, int year) {
  const chr::sys_days first{chr::year{year} / chr::January / 1};
  const chr::sys_days last{chr::year{year} / chr::December / 31};
  const auto lo = std::max(first, chr::sys_days{start});
  const auto hi = std::min(last, chr::sys_days{end});
  return hi < lo ? 0 : (hi - lo).count() + 1;
}

std::vector<WeightMatrix> compute_weights(const TableSet& tables, const WeightOptions& options,
                                          std::vector<std::string>* log) {
  if (tables.projects.empty()) return {};

  int first_year = INT32_MAX, last_year = INT32_MIN;
  std::unordered_map<std::string, const ProjectRecord*> by_id;
  for (const auto& p : tables.projects) {
    first_year = std::min(first_year, static_cast<int>(p.startDate.year()));
    last_year = std::max(last_year, static_cast<int>(p.endDate.year()));
    by_id.emplace(p.projID, &p);
    if (p.startDate == p.endDate && log)
      log->push_back(fmt::format("weights: project {} has zero duration; value assigned to {}",
                                 p.projID, static_cast<int>(p.startDate.year())));
  }

  std::vector<WeightMatrix> out;
  for (int y = first_year; y <= last_year; ++y) out.push_back({y, options.basis, {}});

  for (const auto& r : tables.participations) {
    auto it = by_id.find(r.projID);
    if (it == by_id.end()) {
      if (log)
        log->push_back(fmt::format("weights: participation ({}, {}) references an unknown project",
                                   r.orgID, r.projID));
      continue;
    }
    const auto& p = *it->second;
    const double value = r.value(options.basis) / 1000.0;
    const double denominator = options.apportionment == Apportionment::ByDuration
                                   ? static_cast<double>(duration_days(p.startDate, p.endDate))
                                   : 365.0;
    for (int y = static_cast<int>(p.startDate.year()); y <= static_cast<int>(p.endDate.year());
         ++y) {
      const long days = days_in_year(p.startDate, p.endDate, y);
      if (days == 0) continue;
      out[static_cast<std::size_t>(y - first_year)].entries[{r.orgID, r.projID}] =
          value * static_cast<double>(days) / denominator;
    }
  }
  return out;
}

}  // namespace collabnet
