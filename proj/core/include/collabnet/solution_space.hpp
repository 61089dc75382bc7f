#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "collabnet/community.hpp"
#include "collabnet/graph.hpp"

namespace collabnet {

struct ExplorationConfig {
  int tMax = 1000;
  /// Trials without a new unique solution required before stopping.
  int stopPatience = 25;
  /// Every entry's credible interval must be at most this wide to stop early.
  double intervalWidthTarget = 0.1;
  double credibleLevel = 0.95;
  double priorAlpha = 1.0;
  double priorBeta = 1.0;
  /// Trials run concurrently; results are identical for any value.
  unsigned workers = 1;
};

/// Throws Error(InvalidArgument) when a field is out of range.
void check(const ExplorationConfig& config);

struct SolutionEntry {
  std::string key;
  Partition representative;
  std::size_t count = 0;
  std::size_t firstSeenTrial = 0;  // 1-based
  double pMean = 0.0;
  double pLower = 0.0;
  double pUpper = 0.0;
  bool valid = false;
  std::size_t singletons = 0;
  double modularity = 0.0;
};

struct TrialRecord {
  std::size_t trial = 0;  // 1-based
  std::uint64_t seed = 0;
  bool failed = false;
  std::string key;  // empty for failed trials
  bool valid = false;
  double modularity = 0.0;
  std::string error;
};

/// Unique partitions observed over repeated shuffled trials, with counts and
/// posterior probability estimates.
struct SolutionSpace {
  int year = 0;
  Algorithm algorithm = Algorithm::Walktrap;
  DetectParams params;
  std::uint64_t baseSeed = 0;
  std::size_t trials = 0;  // executed, including failed
  std::size_t failed = 0;
  double credibleLevel = 0.95;
  double priorAlpha = 1.0;
  double priorBeta = 1.0;
  std::vector<SolutionEntry> entries;  // in order of first appearance
  std::vector<TrialRecord> log;

  std::size_t successful() const { return trials - failed; }
  const SolutionEntry* find(const std::string& key) const;
};

struct Posterior {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Beta(alpha + count, beta + trials - count) posterior mean and equal-tailed
/// credible interval at `level`.
Posterior beta_posterior(std::size_t count, std::size_t trials, double alpha, double beta,
                         double level);

/// Seed of trial `t` (1-based) for a given base seed.
std::uint64_t trial_seed(std::uint64_t baseSeed, std::size_t trial);

/// Repeats shuffle + detect until config.tMax trials, or until no new solution
/// has appeared for stopPatience trials and every interval is narrower than
/// intervalWidthTarget. Failed trials are logged; more than half failing
/// throws Error(TooManyFailures).
SolutionSpace explore(const CollabGraph& graph, Algorithm algorithm, const DetectParams& params,
                      const ExplorationConfig& config, std::uint64_t baseSeed);

/// Recomputes pMean/pLower/pUpper of every entry from its count.
void estimate_probabilities(SolutionSpace& space, const ExplorationConfig& config);

/// The only entry when there is one; otherwise the unique entry whose lower
/// credible bound exceeds `threshold`.
std::optional<Partition> select_dominant(const SolutionSpace& space, double threshold = 0.5);

enum class ConsensusWeighting { Frequency, Uniform };

const char* to_string(ConsensusWeighting w);
std::optional<ConsensusWeighting> weighting_from_string(std::string_view s);

struct ConsensusConfig {
  double threshold = 0.5;
  ConsensusWeighting weighting = ConsensusWeighting::Frequency;
};

/// Fraction of (weighted) solutions placing u and v together, indexed by the
/// graph's node indices, row-major n x n.
std::vector<double> coassignment(const SolutionSpace& space, const CollabGraph& graph,
                                 ConsensusWeighting weighting);

/// Consensus community detection over the solution space. Pairs co-assigned
/// above the threshold form candidate communities; a node tied exactly at the
/// threshold joins the candidate of its highest-scoring neighbour (smaller
/// community key on ties). Invalid candidates are re-detected on their
/// induced subgraph, then split into connected pieces and merged into their
/// most strongly linked neighbour until every community is valid.
/// Throws Error(EmptyConsensus) when no pair reaches the threshold although
/// some pair is co-assigned.
Partition consensus(const SolutionSpace& space, const CollabGraph& graph,
                    const ConsensusConfig& config = {});

enum class SelectionMethod { Single, Dominant, Consensus };
const char* to_string(SelectionMethod m);

struct Selection {
  Partition partition;
  SelectionMethod method = SelectionMethod::Single;
};

/// Single or dominant solution when one exists, consensus otherwise.
Selection select_partition(const SolutionSpace& space, const CollabGraph& graph,
                           double dominanceThreshold, const ConsensusConfig& consensusConfig);

/// Full solution space with per-trial log, as JSON.
void write_solution_space_json(std::ostream& out, const SolutionSpace& space);
/// "trial,entryKey,pMean,pLower,pUpper": posterior of every entry seen so far
/// after each successful trial.
void write_probability_bands(std::ostream& out, const SolutionSpace& space);
/// "entryKey,count,firstSeenTrial,pMean,pLower,pUpper,valid,communities,singletons,modularity"
void write_solution_frequencies(std::ostream& out, const SolutionSpace& space);
/// "entryKey,community,size"
void write_community_sizes(std::ostream& out, const SolutionSpace& space);
/// "entryA,entryB,ari,nmi" over the `limit` most frequent entries.
void write_pairwise_similarity(std::ostream& out, const SolutionSpace& space,
                               std::size_t limit = 50);
void write_validity_json(std::ostream& out, const ValidityReport& report);

}  // namespace collabnet
