#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "collabnet/community.hpp"
#include "collabnet/graph.hpp"
#include "collabnet/ingest.hpp"
#include "collabnet/solution_space.hpp"

namespace collabnet {

struct ProgrammeInput {
  Programme programme = Programme::H2020;
  std::filesystem::path projects;
  std::filesystem::path organizations;
  std::filesystem::path topics;
};

/// Everything a run depends on besides the input files themselves.
struct RunConfig {
  std::vector<ProgrammeInput> programmes;
  std::optional<std::filesystem::path> labels;
  char delimiter = ';';
  /// Empty means no topic filter.
  std::vector<std::string> topics;
  WeightBasis basis = WeightBasis::NetEcContribution;
  Apportionment apportionment = Apportionment::ByDuration;
  ProjectionRule projection = ProjectionRule::ProductSplit;
  Algorithm algorithm = Algorithm::Walktrap;
  DetectParams params;
  ExplorationConfig exploration;
  double dominanceThreshold = 0.5;
  ConsensusConfig consensus;
  double theta = 0.5;
  std::optional<std::size_t> topN;
  /// Enrichment label whose true/false subgraphs get their own centrality table.
  std::optional<std::string> splitLabel;
  std::filesystem::path output = "out";
  std::uint64_t baseSeed = 0;
};

/// Parses the JSON config. Relative input and output paths are resolved
/// against `base`. Throws Error(InvalidArgument) on unknown enum values.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base = {});
RunConfig load_config(const std::filesystem::path& path);
/// Canonical JSON form, as embedded in manifests.
std::string config_to_json(const RunConfig& config);

enum class ExitCode : int { Ok = 0, Partial = 1, Fatal = 2 };

struct StageResult {
  ExitCode code = ExitCode::Ok;
  std::vector<std::string> outputs;   // file names relative to the stage directory
  std::vector<std::string> failures;  // per-year problems that did not stop the stage
};

/// Stage directories below config.output.
std::filesystem::path stage_dir(const RunConfig& config, std::string_view stage);

/// Each stage reads its inputs (or upstream outputs) completely before writing
/// anything, so a fatal error leaves no partial outputs behind. Every stage
/// writes manifest.json listing each output with its SHA-256.
StageResult cmd_ingest(const RunConfig& config);
StageResult cmd_analyze(const RunConfig& config);
StageResult cmd_temporal(const RunConfig& config);
StageResult cmd_report(const RunConfig& config);

/// Structural check of report.json; returns the problems found.
std::vector<std::string> validate_report_json(const std::string& text);

}  // namespace collabnet
