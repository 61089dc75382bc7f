#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "builders.hpp"
#include "collabnet/error.hpp"
#include "collabnet/solution_space.hpp"
#include "oracles.hpp"

using namespace collabnet;
using testing::make_graph;

namespace {

constexpr Algorithm kAll[] = {Algorithm::Louvain, Algorithm::LabelPropagation, Algorithm::Walktrap};

SolutionEntry entry(const CollabGraph& g, std::vector<int> m, std::size_t count) {
  SolutionEntry e;
  e.representative = Partition::from_membership(g, m);
  e.key = e.representative.key();
  e.count = count;
  return e;
}

SolutionSpace space_of(std::vector<SolutionEntry> entries) {
  SolutionSpace s;
  for (const auto& e : entries) s.trials += e.count;
  s.entries = std::move(entries);
  estimate_probabilities(s, {});
  return s;
}

}  // namespace

TEST_SUITE("solution_space") {

TEST_CASE("posterior mean and interval") {
  auto p = beta_posterior(10, 10, 1, 1, 0.95);
  CHECK(p.mean == 11.0 / 12.0);
  CHECK(beta_posterior(0, 10, 1, 1, 0.95).mean == doctest::Approx(1.0 / 12.0).epsilon(1e-15));

  for (auto [c, t] : {std::pair{3, 10}, {40, 100}, {0, 7}, {12, 12}}) {
    const auto q = beta_posterior(static_cast<std::size_t>(c), static_cast<std::size_t>(t), 1, 1, 0.95);
    CHECK(q.lower <= q.mean);
    CHECK(q.mean <= q.upper);
    CHECK(oracle::beta_cdf(q.lower, 1 + c, 1 + t - c) == doctest::Approx(0.025).epsilon(1e-4));
    CHECK(oracle::beta_cdf(q.upper, 1 + c, 1 + t - c) == doctest::Approx(0.975).epsilon(1e-4));
  }
}

TEST_CASE("intervals narrow as trials grow") {
  double previous = 1.0;
  for (std::size_t t : {10u, 100u, 1000u}) {
    const auto p = beta_posterior(3 * t / 10, t, 1, 1, 0.95);
    CHECK(p.upper - p.lower < previous);
    previous = p.upper - p.lower;
  }
}

TEST_CASE("dominant solution") {
  const auto g = make_graph(4, {});
  const auto a = entry(g, {0, 0, 1, 1}, 90), b = entry(g, {0, 1, 1, 1}, 5), c = entry(g, {0, 0, 0, 1}, 5);

  CHECK(select_dominant(space_of({entry(g, {0, 0, 1, 1}, 3)}))->key() == a.key);
  auto s = space_of({a, b, c});
  REQUIRE(select_dominant(s, 0.5));
  CHECK(select_dominant(s, 0.5)->key() == a.key);
  CHECK(s.entries[0].pLower > 0.5);

  auto t = space_of({entry(g, {0, 0, 1, 1}, 40), entry(g, {0, 1, 1, 1}, 35), entry(g, {0, 0, 0, 1}, 25)});
  CHECK(!select_dominant(t, 0.5));
}

TEST_CASE("exploring an unambiguous graph finds one solution") {
  const auto g = make_graph(10, testing::two_cliques(5, 5, 1, 0.1));
  for (auto alg : kAll) {
    CAPTURE(to_string(alg));
    ExplorationConfig cfg;
    cfg.tMax = 50;
    cfg.stopPatience = 1000;  // run all 50 trials
    auto s = explore(g, alg, {}, cfg, 17);
    CHECK(s.trials == 50);
    REQUIRE(s.entries.size() == 1);
    CHECK(s.entries[0].count == 50);
    CHECK(s.entries[0].pMean == doctest::Approx(51.0 / 52.0));
    CHECK(s.entries[0].valid);
  }
}

TEST_CASE("stopping rule") {
  // One solution seen every time: Beta(t+1, 1) has width 0.975^(1/(t+1)) - 0.025^(1/(t+1)),
  // which first drops below 0.1 at t = 34; patience 25 is already met.
  const auto g = make_graph(10, testing::two_cliques(5, 5, 1, 0.1));
  auto s = explore(g, Algorithm::Walktrap, {}, {}, 1);
  CHECK(s.trials == 34);
}

TEST_CASE("exploration bookkeeping") {
  Rng rng(21);
  const auto g = make_graph(40, testing::random_edges(rng, 40, 0.12));
  ExplorationConfig cfg;
  cfg.tMax = 60;
  auto s = explore(g, Algorithm::Louvain, {}, cfg, 5);

  std::size_t counted = 0;
  std::set<std::string> keys;
  for (const auto& e : s.entries) {
    counted += e.count;
    keys.insert(e.key);
    CHECK(e.pLower <= e.pMean);
    CHECK(e.pMean <= e.pUpper);
    CHECK(e.pMean > 0.0);
    CHECK(e.pMean < 1.0);
    CHECK(e.key == e.representative.key());
  }
  CHECK(counted + s.failed == s.trials);
  CHECK(keys.size() == s.entries.size());
  CHECK(s.log.size() == s.trials);

  SUBCASE("same base seed, same space") {
    auto again = explore(g, Algorithm::Louvain, {}, cfg, 5);
    REQUIRE(again.entries.size() == s.entries.size());
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
      CHECK(again.entries[i].key == s.entries[i].key);
      CHECK(again.entries[i].count == s.entries[i].count);
      CHECK(again.entries[i].firstSeenTrial == s.entries[i].firstSeenTrial);
    }
  }
  SUBCASE("worker count does not change the result") {
    auto par = cfg;
    par.workers = 4;
    auto p = explore(g, Algorithm::Louvain, {}, par, 5);
    std::ostringstream a, b;
    write_solution_space_json(a, s);
    write_solution_space_json(b, p);
    CHECK(a.str() == b.str());
  }
}

TEST_CASE("too many failed trials") {
  Rng rng(3);
  const auto g = make_graph(40, testing::random_edges(rng, 40, 0.5));
  DetectParams p;
  p.maxSweeps = 1;
  ExplorationConfig cfg;
  cfg.tMax = 20;
  try {
    explore(g, Algorithm::LabelPropagation, p, cfg, 1);
    FAIL("expected TooManyFailures");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooManyFailures);
  }
}

TEST_CASE("config checks") {
  ExplorationConfig cfg;
  cfg.tMax = 0;
  CHECK_THROWS_AS(check(cfg), Error);
  cfg = {};
  cfg.credibleLevel = 1.0;
  CHECK_THROWS_AS(check(cfg), Error);
}

TEST_CASE("consensus") {
  SUBCASE("identical solutions") {
    const auto g = make_graph(6, testing::two_cliques(3, 3, 1, 0.5));
    auto s = space_of({entry(g, {0, 0, 0, 1, 1, 1}, 5)});
    auto s2 = s;
    s2.entries.push_back(s.entries[0]);  // the same grouping twice
    for (const auto* sp : {&s, &s2}) {
      auto p = consensus(*sp, g);
      CHECK(p.key() == s.entries[0].key);
    }
  }
  SUBCASE("0.9 / 0.1 weighting") {
    const auto g = make_graph(5, testing::cliques({5}));
    auto s = space_of({entry(g, {0, 0, 0, 0, 0}, 1), entry(g, {0, 1, 2, 3, 4}, 1)});
    s.entries[0].pMean = 0.9;
    s.entries[1].pMean = 0.1;
    const auto D = coassignment(s, g, ConsensusWeighting::Frequency);
    CHECK(D[0 * 5 + 1] == doctest::Approx(0.9));
    auto p = consensus(s, g);
    CHECK(p.community_count() == 1);
  }
  SUBCASE("one node in disagreement") {
    // triangles {0,1,2} and {3,4,5} joined by 2-3; node 2 is placed on either side
    const auto g = make_graph(6, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}, {3, 4, 1}, {3, 5, 1}, {4, 5, 1}, {2, 3, 1}});
    auto s = space_of({entry(g, {0, 0, 0, 1, 1, 1}, 10), entry(g, {0, 0, 1, 1, 1, 1}, 10)});
    const auto D = coassignment(s, g, ConsensusWeighting::Frequency);
    CHECK(D[2 * 6 + 0] == doctest::Approx(0.5));
    CHECK(D[2 * 6 + 3] == doctest::Approx(0.5));
    auto p = consensus(s, g);
    // tie at the threshold: joins the candidate with the smaller key, {0,1}
    CHECK(p.key() == Partition::from_membership(g, std::vector<int>{0, 0, 0, 1, 1, 1}).key());

    ConsensusConfig lower{0.4, ConsensusWeighting::Frequency};
    CHECK(consensus(s, g, lower).community_count() == 1);
  }
  SUBCASE("threshold nobody reaches") {
    const auto g = make_graph(4, testing::cliques({4}));
    auto s = space_of({entry(g, {0, 0, 1, 2}, 1), entry(g, {0, 1, 1, 2}, 1), entry(g, {0, 1, 2, 2}, 1)});
    try {
      consensus(s, g, {0.5, ConsensusWeighting::Uniform});
      FAIL("expected EmptyConsensus");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::EmptyConsensus);
    }
  }
  SUBCASE("idempotent") {
    Rng rng(31);
    const auto g = make_graph(30, testing::random_edges(rng, 30, 0.15));
    ExplorationConfig cfg;
    cfg.tMax = 40;
    auto s = explore(g, Algorithm::Louvain, {}, cfg, 3);
    auto p = consensus(s, g);
    auto again = consensus(space_of({entry(g, p.membership_for(g), 1)}), g);
    CHECK(again.key() == p.key());
  }
  SUBCASE("output is valid") {
    Rng rng(44);
    for (int t = 0; t < 8; ++t) {
      const auto g = make_graph(30, testing::random_edges(rng, 30, 0.1 + 0.05 * t));
      ExplorationConfig cfg;
      cfg.tMax = 30;
      for (auto alg : {Algorithm::Louvain, Algorithm::LabelPropagation}) {
        auto s = explore(g, alg, {}, cfg, static_cast<std::uint64_t>(t));
        try {
          CHECK(validate(g, consensus(s, g)).valid);
        } catch (const Error& e) {
          CHECK(e.kind() == ErrorKind::EmptyConsensus);
        }
      }
    }
  }
}

TEST_CASE("selection method") {
  const auto g = make_graph(6, testing::two_cliques(3, 3, 1, 0.5));
  auto single = space_of({entry(g, {0, 0, 0, 1, 1, 1}, 5)});
  CHECK(select_partition(single, g, 0.5, {}).method == SelectionMethod::Single);
  auto dominant = space_of({entry(g, {0, 0, 0, 1, 1, 1}, 95), entry(g, {0, 0, 1, 1, 1, 1}, 5)});
  CHECK(select_partition(dominant, g, 0.5, {}).method == SelectionMethod::Dominant);
  auto split = space_of({entry(g, {0, 0, 0, 1, 1, 1}, 50), entry(g, {0, 0, 1, 1, 1, 1}, 50)});
  CHECK(select_partition(split, g, 0.5, {}).method == SelectionMethod::Consensus);
}

TEST_CASE("exports") {
  const auto g = make_graph(10, testing::two_cliques(5, 5, 1, 0.1));
  ExplorationConfig cfg;
  cfg.tMax = 10;
  auto s = explore(g, Algorithm::Louvain, {}, cfg, 1);
  std::ostringstream json, bands, freq, sizes, sim, valid;
  write_solution_space_json(json, s);
  write_probability_bands(bands, s);
  write_solution_frequencies(freq, s);
  write_community_sizes(sizes, s);
  write_pairwise_similarity(sim, s);
  write_validity_json(valid, validate(g, s.entries[0].representative));
  CHECK(json.str().find("\"schemaVersion\": 1") != std::string::npos);
  CHECK(bands.str().rfind("trial,entryKey,pMean,pLower,pUpper\n", 0) == 0);
  CHECK(freq.str().rfind("entryKey,count,", 0) == 0);
  CHECK(sizes.str().rfind("entryKey,community,size\n", 0) == 0);
  CHECK(sim.str().rfind("entryA,entryB,ari,nmi\n", 0) == 0);
  CHECK(valid.str().find("\"valid\": true") != std::string::npos);
}

TEST_CASE("credible intervals are calibrated") {
  Rng rng(77);
  const double truth = 0.3;
  int covered = 0;
  for (int sim = 0; sim < 300; ++sim) {
    std::size_t c = 0;
    const std::size_t t = 50;
    for (std::size_t i = 0; i < t; ++i) c += rng.uniform() < truth;
    const auto p = beta_posterior(c, t, 1, 1, 0.95);
    covered += p.lower <= truth && truth <= p.upper;
  }
  CHECK(covered >= 270);
}

}  // TEST_SUITE
