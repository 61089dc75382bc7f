#include "collabnet/solution_space.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <future>
#include <map>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "collabnet/csv.hpp"
#include "collabnet/error.hpp"
#include "collabnet/rng.hpp"

namespace collabnet {

using nlohmann::ordered_json;

void check(const ExplorationConfig& c) {
  if (c.tMax < 1) throw Error(ErrorKind::InvalidArgument, "tMax must be >= 1");
  if (c.stopPatience < 0) throw Error(ErrorKind::InvalidArgument, "stopPatience must be >= 0");
  if (!(c.credibleLevel > 0.0 && c.credibleLevel < 1.0))
    throw Error(ErrorKind::InvalidArgument, "credibleLevel must be in (0, 1)");
  if (!(c.priorAlpha > 0.0 && c.priorBeta > 0.0))
    throw Error(ErrorKind::InvalidArgument, "prior parameters must be positive");
}

const SolutionEntry* SolutionSpace::find(const std::string& key) const {
  for (const auto& e : entries)
    if (e.key == key) return &e;
  return nullptr;
}

Posterior beta_posterior(std::size_t count, std::size_t trials, double alpha, double beta,
                         double level) {
  const double a = alpha + static_cast<double>(count);
  const double b = beta + static_cast<double>(trials - count);
  boost::math::beta_distribution<double> dist(a, b);
  const double tail = (1.0 - level) / 2.0;
  return {a / (a + b), boost::math::quantile(dist, tail), boost::math::quantile(dist, 1.0 - tail)};
}

std::uint64_t trial_seed(std::uint64_t baseSeed, std::size_t trial) {
  return derive_seed(baseSeed, trial);
}

namespace {

struct Outcome {
  std::optional<Partition> partition;
  std::string error;
};

Outcome run_trial(const CollabGraph& graph, Algorithm algorithm, const DetectParams& params,
                  std::uint64_t seed) {
  try {
    const auto shuffled = shuffle(graph, seed);
    return {detect(shuffled, algorithm, params, seed), {}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Nonconvergence) throw;
    return {std::nullopt, e.what()};
  }
}

double max_width(const SolutionSpace& s, const ExplorationConfig& c) {
  double widest = 0.0;
  for (const auto& e : s.entries) {
    const auto post =
        beta_posterior(e.count, s.successful(), c.priorAlpha, c.priorBeta, c.credibleLevel);
    widest = std::max(widest, post.upper - post.lower);
  }
  return widest;
}

}  // namespace

SolutionSpace explore(const CollabGraph& graph, Algorithm algorithm, const DetectParams& params,
                      const ExplorationConfig& config, std::uint64_t baseSeed) {
  check(config);
  if (graph.empty()) throw Error(ErrorKind::InvalidArgument, "cannot explore an empty graph");

  SolutionSpace space;
  space.year = graph.year();
  space.algorithm = algorithm;
  space.params = params;
  space.baseSeed = baseSeed;
  space.credibleLevel = config.credibleLevel;
  space.priorAlpha = config.priorAlpha;
  space.priorBeta = config.priorBeta;

  std::unordered_map<std::string, std::size_t> index;
  std::size_t since_new = 0;
  bool stop = false;
  const auto t_max = static_cast<std::size_t>(config.tMax);
  const std::size_t workers = std::max(1u, config.workers);

  // Trials are computed in batches but tallied strictly in trial order, and
  // the stopping rule is evaluated after each one, so the result equals a
  // sequential run.
  while (!stop && space.trials < t_max) {
    const std::size_t batch = std::min(workers, t_max - space.trials);
    std::vector<Outcome> outcomes(batch);
    if (batch == 1) {
      outcomes[0] = run_trial(graph, algorithm, params, trial_seed(baseSeed, space.trials + 1));
    } else {
      std::vector<std::future<Outcome>> futures;
      for (std::size_t i = 0; i < batch; ++i)
        futures.push_back(std::async(std::launch::async, run_trial, std::cref(graph), algorithm,
                                     std::cref(params), trial_seed(baseSeed, space.trials + 1 + i)));
      for (std::size_t i = 0; i < batch; ++i) outcomes[i] = futures[i].get();
    }

    for (auto& outcome : outcomes) {
      const std::size_t t = ++space.trials;
      TrialRecord record;
      record.trial = t;
      record.seed = trial_seed(baseSeed, t);
      if (!outcome.partition) {
        record.failed = true;
        record.error = outcome.error;
        ++space.failed;
        ++since_new;
      } else {
        auto& p = *outcome.partition;
        record.key = p.key();
        auto [it, fresh] = index.try_emplace(p.key(), space.entries.size());
        if (fresh) {
          const auto report = validate(graph, p);
          SolutionEntry entry;
          entry.key = p.key();
          entry.firstSeenTrial = t;
          entry.valid = report.valid;
          entry.singletons = report.singletonCount;
          entry.modularity = modularity(graph, p, params.resolution);
          entry.representative = std::move(p);
          space.entries.push_back(std::move(entry));
          since_new = 0;
        } else {
          ++since_new;
        }
        auto& entry = space.entries[it->second];
        ++entry.count;
        record.valid = entry.valid;
        record.modularity = entry.modularity;
      }
      space.log.push_back(std::move(record));

      if (since_new >= static_cast<std::size_t>(config.stopPatience) && space.successful() > 0 &&
          max_width(space, config) <= config.intervalWidthTarget) {
        stop = true;
        break;
      }
    }
  }

  if (2 * space.failed > space.trials || space.entries.empty())
    throw Error(ErrorKind::TooManyFailures,
                fmt::format("{} of {} trials failed for {} in {}", space.failed, space.trials,
                            to_string(algorithm), graph.year()));
  estimate_probabilities(space, config);
  return space;
}

void estimate_probabilities(SolutionSpace& space, const ExplorationConfig& config) {
  space.credibleLevel = config.credibleLevel;
  space.priorAlpha = config.priorAlpha;
  space.priorBeta = config.priorBeta;
  for (auto& e : space.entries) {
    const auto post = beta_posterior(e.count, space.successful(), config.priorAlpha,
                                     config.priorBeta, config.credibleLevel);
    e.pMean = post.mean;
    e.pLower = post.lower;
    e.pUpper = post.upper;
  }
}

std::optional<Partition> select_dominant(const SolutionSpace& space, double threshold) {
  if (space.entries.size() == 1) return space.entries.front().representative;
  const SolutionEntry* found = nullptr;
  for (const auto& e : space.entries) {
    if (e.pLower > threshold) {
      if (found) return std::nullopt;
      found = &e;
    }
  }
  if (!found) return std::nullopt;
  return found->representative;
}

const char* to_string(ConsensusWeighting w) {
  return w == ConsensusWeighting::Frequency ? "frequency" : "uniform";
}

std::optional<ConsensusWeighting> weighting_from_string(std::string_view s) {
  if (s == "frequency") return ConsensusWeighting::Frequency;
  if (s == "uniform") return ConsensusWeighting::Uniform;
  return std::nullopt;
}

const char* to_string(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::Single: return "single";
    case SelectionMethod::Dominant: return "dominant";
    case SelectionMethod::Consensus: return "consensus";
  }
  return "single";
}

std::vector<double> coassignment(const SolutionSpace& space, const CollabGraph& graph,
                                 ConsensusWeighting weighting) {
  const auto n = graph.node_count();
  std::vector<double> together(n * n, 0.0);
  double total_weight = 0.0;
  std::vector<std::vector<NodeIndex>> groups;
  for (const auto& e : space.entries) {
    const double w = weighting == ConsensusWeighting::Frequency ? e.pMean : 1.0;
    total_weight += w;
    const auto membership = e.representative.membership_for(graph);
    groups.assign(static_cast<std::size_t>(e.representative.community_count()), {});
    for (NodeIndex v = 0; v < n; ++v) groups[static_cast<std::size_t>(membership[v])].push_back(v);
    for (const auto& g : groups)
      for (auto u : g)
        for (auto v : g) together[u * n + v] += w;
  }
  if (total_weight > 0.0)
    for (auto& d : together) d /= total_weight;
  return together;
}

namespace {

constexpr double kThresholdTolerance = 1e-12;

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Communities of node indices; `rank` orders nodes by orgID so the smallest
// rank in a community is its canonical key.
using Groups = std::vector<std::vector<NodeIndex>>;

std::uint32_t group_key(const std::vector<NodeIndex>& g, const std::vector<std::uint32_t>& rank) {
  std::uint32_t k = UINT32_MAX;
  for (auto v : g) k = std::min(k, rank[v]);
  return k;
}

void sort_groups(Groups& groups, const std::vector<std::uint32_t>& rank) {
  std::sort(groups.begin(), groups.end(), [&](const auto& a, const auto& b) {
    return group_key(a, rank) < group_key(b, rank);
  });
}

Groups connected_pieces(const CollabGraph& graph, const std::vector<NodeIndex>& group) {
  std::vector<int> local(graph.node_count(), -1);
  for (std::size_t i = 0; i < group.size(); ++i) local[group[i]] = static_cast<int>(i);
  std::vector<char> seen(group.size(), 0);
  Groups pieces;
  for (std::size_t start = 0; start < group.size(); ++start) {
    if (seen[start]) continue;
    pieces.emplace_back();
    std::vector<std::size_t> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      pieces.back().push_back(group[i]);
      for (const auto& nb : graph.neighbors(group[i])) {
        const int j = local[nb.node];
        if (j >= 0 && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = 1;
          stack.push_back(static_cast<std::size_t>(j));
        }
      }
    }
  }
  return pieces;
}

std::vector<int> to_membership(const Groups& groups, std::size_t n) {
  std::vector<int> m(n, -1);
  for (std::size_t c = 0; c < groups.size(); ++c)
    for (auto v : groups[c]) m[v] = static_cast<int>(c);
  return m;
}

bool group_valid(const CollabGraph& graph, const std::vector<NodeIndex>& group,
                 const std::vector<int>& membership, int c) {
  double external = 0.0, incident = 0.0;
  for (auto v : group)
    for (const auto& nb : graph.neighbors(v)) {
      incident += nb.weight;
      if (membership[nb.node] != c) external += nb.weight;
    }
  if (incident > 0.0 && external / incident > 0.5) return false;
  return connected_pieces(graph, group).size() == 1;
}

}  // namespace

Partition consensus(const SolutionSpace& space, const CollabGraph& graph,
                    const ConsensusConfig& config) {
  if (space.entries.empty())
    throw Error(ErrorKind::InvalidArgument, "consensus needs a nonempty solution space");
  const auto n = graph.node_count();
  const auto D = coassignment(space, graph, config.weighting);
  const double theta = config.threshold;

  std::vector<std::uint32_t> rank(n);
  std::vector<NodeIndex> by_rank(n);
  std::iota(by_rank.begin(), by_rank.end(), NodeIndex{0});
  std::sort(by_rank.begin(), by_rank.end(),
            [&](NodeIndex a, NodeIndex b) { return graph.node(a).id < graph.node(b).id; });
  for (std::uint32_t r = 0; r < n; ++r) rank[by_rank[r]] = r;

  bool any_reached = false, any_positive = false;
  UnionFind uf(n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) {
      const double d = D[u * n + v];
      if (d > 0.0) any_positive = true;
      if (d >= theta - kThresholdTolerance) any_reached = true;
      if (d > theta + kThresholdTolerance) uf.unite(u, v);
    }
  if (any_positive && !any_reached)
    throw Error(ErrorKind::EmptyConsensus,
                fmt::format("no pair is co-assigned in at least {} of the weighted solutions; "
                            "lower the consensus threshold",
                            theta));

  // Nodes left alone but tied at the threshold join their best neighbour.
  std::vector<std::size_t> root_size(n, 0);
  std::vector<std::uint32_t> root_key(n, UINT32_MAX);
  for (std::size_t v = 0; v < n; ++v) {
    const auto r = uf.find(v);
    ++root_size[r];
    root_key[r] = std::min(root_key[r], rank[v]);
  }
  for (auto u : by_rank) {
    if (root_size[uf.find(u)] != 1) continue;
    std::optional<std::size_t> best;
    double best_d = 0.0;
    std::uint32_t best_key = UINT32_MAX;
    for (std::size_t v = 0; v < n; ++v) {
      if (v == u) continue;
      const double d = D[u * n + v];
      if (d < theta - kThresholdTolerance) continue;
      const auto key = root_key[uf.find(v)];
      if (!best || d > best_d + kThresholdTolerance ||
          (std::abs(d - best_d) <= kThresholdTolerance && key < best_key)) {
        best = v;
        best_d = d;
        best_key = key;
      }
    }
    if (best) {
      const auto ru = uf.find(u), rv = uf.find(*best);
      const auto size = root_size[ru] + root_size[rv];
      const auto key = std::min(root_key[ru], root_key[rv]);
      uf.unite(ru, rv);
      root_size[uf.find(u)] = size;
      root_key[uf.find(u)] = key;
    }
  }

  std::map<std::size_t, std::vector<NodeIndex>> by_root;
  for (auto v : by_rank) by_root[uf.find(v)].push_back(v);
  Groups groups;
  for (auto& [root, g] : by_root) groups.push_back(std::move(g));
  sort_groups(groups, rank);

  // Re-detect invalid candidates on their induced subgraph.
  {
    auto membership = to_membership(groups, n);
    Groups refined;
    for (std::size_t c = 0; c < groups.size(); ++c) {
      const auto& g = groups[c];
      if (g.size() < 2 || group_valid(graph, g, membership, static_cast<int>(c))) {
        refined.push_back(g);
        continue;
      }
      const auto sub = graph.induced(g);
      const auto seed = derive_seed(space.baseSeed, 1'000'000 + c);
      const auto local = detect(sub, space.algorithm, space.params, seed).membership_for(sub);
      std::map<int, std::vector<NodeIndex>> parts;
      for (std::size_t i = 0; i < g.size(); ++i) parts[local[i]].push_back(g[i]);
      for (auto& [id, part] : parts) refined.push_back(std::move(part));
    }
    groups.clear();
    for (const auto& g : refined)
      for (auto& piece : connected_pieces(graph, g)) groups.push_back(std::move(piece));
    sort_groups(groups, rank);
  }

  // Merge any community still too open into its most strongly linked neighbour.
  for (;;) {
    auto membership = to_membership(groups, n);
    std::optional<std::size_t> bad;
    for (std::size_t c = 0; c < groups.size() && !bad; ++c)
      if (!group_valid(graph, groups[c], membership, static_cast<int>(c))) bad = c;
    if (!bad) break;

    std::map<int, double> links;
    for (auto v : groups[*bad])
      for (const auto& nb : graph.neighbors(v))
        if (membership[nb.node] != static_cast<int>(*bad)) links[membership[nb.node]] += nb.weight;
    int target = links.begin()->first;  // groups are sorted by key, so ties keep the smaller key
    for (const auto& [c, w] : links)
      if (w > links[target]) target = c;

    auto& dst = groups[static_cast<std::size_t>(target)];
    dst.insert(dst.end(), groups[*bad].begin(), groups[*bad].end());
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(*bad));
    sort_groups(groups, rank);
  }

  auto result = Partition::from_membership(graph, to_membership(groups, n));
  result.algorithm = space.algorithm;
  result.seed = space.baseSeed;
  return result;
}

Selection select_partition(const SolutionSpace& space, const CollabGraph& graph,
                           double dominanceThreshold, const ConsensusConfig& consensusConfig) {
  if (space.entries.size() == 1) return {space.entries.front().representative, SelectionMethod::Single};
  if (auto p = select_dominant(space, dominanceThreshold)) return {*p, SelectionMethod::Dominant};
  return {consensus(space, graph, consensusConfig), SelectionMethod::Consensus};
}

namespace {

std::vector<std::size_t> community_sizes(const Partition& p) {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(p.community_count()), 0);
  for (int c : p.membership()) ++sizes[static_cast<std::size_t>(c)];
  return sizes;
}

std::vector<const SolutionEntry*> by_frequency(const SolutionSpace& s) {
  std::vector<const SolutionEntry*> out;
  for (const auto& e : s.entries) out.push_back(&e);
  std::stable_sort(out.begin(), out.end(),
                   [](const auto* a, const auto* b) { return a->count > b->count; });
  return out;
}

}  // namespace

void write_solution_space_json(std::ostream& out, const SolutionSpace& s) {
  ordered_json j;
  j["schemaVersion"] = 1;
  j["year"] = s.year;
  j["algorithm"] = to_string(s.algorithm);
  j["params"] = {{"resolution", s.params.resolution},
                 {"walkLength", s.params.walkLength},
                 {"maxSweeps", s.params.maxSweeps},
                 {"maxLevels", s.params.maxLevels}};
  j["baseSeed"] = std::to_string(s.baseSeed);
  j["trials"] = s.trials;
  j["failed"] = s.failed;
  j["credibleLevel"] = s.credibleLevel;
  j["prior"] = {{"alpha", s.priorAlpha}, {"beta", s.priorBeta}};
  auto& entries = j["entries"] = ordered_json::array();
  for (const auto& e : s.entries)
    entries.push_back({{"key", e.key},
                       {"count", e.count},
                       {"firstSeenTrial", e.firstSeenTrial},
                       {"pMean", e.pMean},
                       {"pLower", e.pLower},
                       {"pUpper", e.pUpper},
                       {"valid", e.valid},
                       {"communities", e.representative.community_count()},
                       {"singletons", e.singletons},
                       {"modularity", e.modularity},
                       {"sizes", community_sizes(e.representative)}});
  auto& log = j["trialLog"] = ordered_json::array();
  for (const auto& t : s.log) {
    ordered_json row{{"trial", t.trial}, {"seed", std::to_string(t.seed)}, {"failed", t.failed}};
    if (t.failed) {
      row["error"] = t.error;
    } else {
      row["key"] = t.key;
      row["valid"] = t.valid;
      row["modularity"] = t.modularity;
    }
    log.push_back(std::move(row));
  }
  out << j.dump(2) << '\n';
}

void write_probability_bands(std::ostream& out, const SolutionSpace& s) {
  csv::Writer w(out);
  w.row({"trial", "entryKey", "pMean", "pLower", "pUpper"});
  std::map<std::string, std::size_t> counts;
  std::vector<std::string> order;
  std::size_t successful = 0;
  for (const auto& t : s.log) {
    if (t.failed) continue;
    ++successful;
    if (counts[t.key]++ == 0) order.push_back(t.key);
    for (const auto& key : order) {
      const auto post =
          beta_posterior(counts[key], successful, s.priorAlpha, s.priorBeta, s.credibleLevel);
      w.row({std::to_string(t.trial), key, csv::format_number(post.mean),
             csv::format_number(post.lower), csv::format_number(post.upper)});
    }
  }
}

void write_solution_frequencies(std::ostream& out, const SolutionSpace& s) {
  csv::Writer w(out);
  w.row({"entryKey", "count", "firstSeenTrial", "pMean", "pLower", "pUpper", "valid",
         "communities", "singletons", "modularity"});
  for (const auto* e : by_frequency(s))
    w.row({e->key, std::to_string(e->count), std::to_string(e->firstSeenTrial),
           csv::format_number(e->pMean), csv::format_number(e->pLower),
           csv::format_number(e->pUpper), e->valid ? "true" : "false",
           std::to_string(e->representative.community_count()), std::to_string(e->singletons),
           csv::format_number(e->modularity)});
}

void write_community_sizes(std::ostream& out, const SolutionSpace& s) {
  csv::Writer w(out);
  w.row({"entryKey", "community", "size"});
  for (const auto* e : by_frequency(s)) {
    const auto sizes = community_sizes(e->representative);
    for (std::size_t c = 0; c < sizes.size(); ++c)
      w.row({e->key, std::to_string(c), std::to_string(sizes[c])});
  }
}

void write_pairwise_similarity(std::ostream& out, const SolutionSpace& s, std::size_t limit) {
  csv::Writer w(out);
  w.row({"entryA", "entryB", "ari", "nmi"});
  auto top = by_frequency(s);
  if (top.size() > limit) top.resize(limit);
  for (std::size_t i = 0; i < top.size(); ++i)
    for (std::size_t j = i + 1; j < top.size(); ++j) {
      const auto sim = similarity(top[i]->representative, top[j]->representative);
      w.row({top[i]->key, top[j]->key, csv::format_number(sim.ari), csv::format_number(sim.nmi)});
    }
}

void write_validity_json(std::ostream& out, const ValidityReport& r) {
  ordered_json j;
  j["schemaVersion"] = 1;
  j["partitionKey"] = r.partitionKey;
  j["valid"] = r.valid;
  j["singletonCount"] = r.singletonCount;
  auto& communities = j["communities"] = ordered_json::array();
  for (std::size_t c = 0; c < r.connectedOK.size(); ++c)
    communities.push_back({{"community", c},
                           {"connected", static_cast<bool>(r.connectedOK[c])},
                           {"mixingParameter", r.mixingParameter[c]}});
  out << j.dump(2) << '\n';
}

}  // namespace collabnet
