#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace collabnet {

using Date = std::chrono::year_month_day;

/// Parses "YYYY-MM-DD" (an optional time suffix is ignored).
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date date);

enum class Programme { H2020, HorizonEurope };
enum class Role { Coordinator, Participant, AssociatedPartner };
enum class WeightBasis { NetEcContribution, TotalCost };

/// How a project's value is spread over calendar years.
enum class Apportionment {
  ByDuration,  // value * days-in-year / total-days; conserves value
  Per365,      // value * days-in-year / 365; reproduction switch, not conserving
};

const char* to_string(Programme p);
const char* to_string(Role r);
const char* to_string(WeightBasis b);
const char* to_string(Apportionment a);
std::optional<Programme> programme_from_string(std::string_view s);
std::optional<WeightBasis> basis_from_string(std::string_view s);
std::optional<Apportionment> apportionment_from_string(std::string_view s);

enum class LabelValue { False, True, Unknown };

struct ProjectRecord {
  std::string projID;
  std::string acronym;
  std::string title;
  Date startDate{};
  Date endDate{};
  std::string callID;
  std::string objectiveText;
  Programme programme = Programme::H2020;
  /// Enrichment labels; a label absent from the map is unknown.
  std::map<std::string, bool> labels;

  LabelValue label(const std::string& name) const;
  bool same_content(const ProjectRecord& other) const;
};

struct ParticipationRecord {
  std::string orgID;
  std::string projID;
  std::string orgName;
  std::string countryCode;
  Role role = Role::Participant;
  double totalCost = 0.0;          // EUR
  double netEcContribution = 0.0;  // EUR

  double value(WeightBasis basis) const {
    return basis == WeightBasis::NetEcContribution ? netEcContribution : totalCost;
  }
};

struct TopicRecord {
  std::string projID;
  std::string topicLabel;

  auto operator<=>(const TopicRecord&) const = default;
};

struct EnrichmentLabel {
  std::string projID;
  std::string labelName;
  bool value = false;
};

struct Reject {
  std::string table;
  std::size_t line = 0;
  std::string reason;
};

struct RowCounts {
  std::size_t in = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// Projects, participations and topics of one or more programmes, plus the
/// bookkeeping collected while producing them.
struct TableSet {
  std::vector<ProjectRecord> projects;
  std::vector<ParticipationRecord> participations;
  std::vector<TopicRecord> topics;

  std::vector<Reject> rejects;
  std::map<std::string, RowCounts> counts;  // keyed by table name
  std::vector<std::string> log;

  const ProjectRecord* find_project(const std::string& projID) const;
};

struct TablePaths {
  std::filesystem::path projects;
  std::filesystem::path organizations;
  std::filesystem::path topics;
};

struct ParseOptions {
  char delimiter = ';';
};

/// Reads the three CORDIS tables of one programme. Missing files and missing
/// required columns throw; malformed rows become rejects.
///
/// Accepted column names (case-insensitive, first match wins):
///   projects:      id|projID, acronym, title, startDate, endDate,
///                  [masterCall|callID], [objective|objectiveText]
///   organizations: projectID|projID, organisationID|orgID, name|orgName,
///                  country|countryCode, role, totalCost, netEcContribution
///   topics:        projectID|projID, euroSciVocTitle|topicLabel|topic
TableSet parse_tables(const TablePaths& paths, Programme programme,
                      const ParseOptions& options = {});

/// Union of two programmes' tables; see the source for collision handling.
TableSet merge_programmes(TableSet a, TableSet b);

/// Keeps projects carrying at least one of `topics` and their participations.
/// Throws Error(InvalidArgument) when `topics` is empty.
TableSet filter_by_topic(const TableSet& tables, const std::set<std::string>& topics);

/// Reads a "projID,label,value" file; value must be true or false.
std::vector<EnrichmentLabel> parse_labels(const std::filesystem::path& path,
                                          std::vector<Reject>& rejects,
                                          char delimiter = ',');

TableSet attach_labels(TableSet tables, const std::vector<EnrichmentLabel>& labels);

/// Sparse organisation x project weights of one calendar year, in kEUR.
struct WeightMatrix {
  using Key = std::pair<std::string, std::string>;  // (orgID, projID)

  int year = 0;
  WeightBasis basis = WeightBasis::NetEcContribution;
  std::map<Key, double> entries;

  double total() const;
  bool empty() const { return entries.empty(); }
};

struct WeightOptions {
  WeightBasis basis = WeightBasis::NetEcContribution;
  Apportionment apportionment = Apportionment::ByDuration;
};

/// Number of days of [start, end] (both inclusive) falling in `year`.
long days_in_year(Date start, Date end, int year);
/// Inclusive length of [start, end] in days.
long duration_days(Date start, Date end);

/// One matrix per year in [min start year, max end year], empty years included.
/// Warnings (zero-duration projects) are appended to `log` when non-null.
std::vector<WeightMatrix> compute_weights(const TableSet& tables, const WeightOptions& options,
                                          std::vector<std::string>* log = nullptr);

}  // namespace collabnet
