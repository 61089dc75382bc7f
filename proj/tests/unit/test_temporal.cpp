#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "builders.hpp"
#include "collabnet/error.hpp"
#include "collabnet/temporal.hpp"

using namespace collabnet;
using testing::org;

namespace {

/// Community c gets orgs [from, to) for every (c, from, to).
Partition ranges(int year, std::initializer_list<std::pair<int, int>> spans) {
  std::map<std::string, int> a;
  int c = 0;
  for (auto [from, to] : spans) {
    for (int i = from; i < to; ++i) a[org(i)] = c;
    ++c;
  }
  auto p = Partition::from_assignment(a);
  p.year = year;
  return p;
}

std::map<EventKind, int> kinds(const std::vector<LineageEvent>& es) {
  std::map<EventKind, int> k;
  for (const auto& e : es) ++k[e.kind];
  return k;
}

}  // namespace

TEST_SUITE("temporal") {

TEST_CASE("identical community continues") {
  auto es = match_communities(ranges(2020, {{0, 8}}), ranges(2021, {{0, 8}}));
  REQUIRE(es.size() == 1);
  CHECK(es[0].kind == EventKind::Continue);
  CHECK(es[0].jaccard == 1.0);
  CHECK(es[0].overlap == 8);
}

TEST_CASE("ten splitting into six and four") {
  auto es = match_communities(ranges(2020, {{0, 10}}), ranges(2021, {{0, 6}, {6, 10}}));
  REQUIRE(es.size() == 2);
  for (const auto& e : es) {
    CHECK(e.kind == EventKind::Split);
    CHECK(e.fromCommunity == 0);
  }
  CHECK(es[0].jaccard == doctest::Approx(0.6));
  CHECK(es[1].jaccard == doctest::Approx(0.4));
}

TEST_CASE("two fives merging into ten") {
  auto es = match_communities(ranges(2020, {{0, 5}, {5, 10}}), ranges(2021, {{0, 10}}));
  REQUIRE(es.size() == 2);
  for (const auto& e : es) {
    CHECK(e.kind == EventKind::Merge);
    CHECK(e.toCommunity == 0);
  }
}

TEST_CASE("time-reversed split is a merge") {
  auto fwd = match_communities(ranges(2020, {{0, 10}}), ranges(2021, {{0, 6}, {6, 10}}));
  auto back = match_communities(ranges(2020, {{0, 6}, {6, 10}}), ranges(2021, {{0, 10}}));
  CHECK(kinds(fwd) == std::map<EventKind, int>{{EventKind::Split, 2}});
  CHECK(kinds(back) == std::map<EventKind, int>{{EventKind::Merge, 2}});
}

TEST_CASE("partial overlap is a mix") {
  // 0..9 then 6..15: four shared of ten on each side
  auto a = ranges(2020, {{0, 10}, {20, 26}});
  auto b = ranges(2021, {{6, 16}, {20, 26}});
  auto es = match_communities(a, b);
  REQUIRE(es.size() == 2);
  CHECK(es[0].kind == EventKind::Mix);
  CHECK(es[0].overlap == 4);
  CHECK(es[0].jaccard == doctest::Approx(4.0 / 16.0));
  CHECK(es[1].kind == EventKind::Continue);
}

TEST_CASE("disjoint pairs appear only in the full matrix") {
  auto a = ranges(2020, {{0, 5}, {5, 10}});
  auto b = ranges(2021, {{0, 5}, {5, 10}});
  CHECK(match_communities(a, b).size() == 2);
  auto full = event_matrix(a, b);
  REQUIRE(full.size() == 4);
  CHECK(kinds(full)[EventKind::Disjoint] == 2);
  for (const auto& e : full)
    if (e.kind == EventKind::Disjoint) {
      CHECK(e.overlap == 0);
      CHECK(e.jaccard == 0.0);
    }
}

TEST_CASE("every overlapping pair gets exactly one kind") {
  Rng rng(13);
  for (int t = 0; t < 200; ++t) {
    std::map<std::string, int> x, y;
    for (int i = 0; i < 30; ++i) {
      if (rng.uniform() < 0.9) x[org(i)] = static_cast<int>(rng.below(5));
      if (rng.uniform() < 0.9) y[org(i)] = static_cast<int>(rng.below(5));
    }
    auto a = Partition::from_assignment(x), b = Partition::from_assignment(y);
    std::set<std::pair<int, int>> overlapping;
    for (const auto& [id, c] : x)
      if (y.contains(id)) overlapping.insert({a.community_of(id), b.community_of(id)});
    for (double theta : {0.3, 0.5, 0.7}) {
      auto es = match_communities(a, b, theta);
      CHECK(es.size() == overlapping.size());
      for (const auto& e : es) {
        CHECK(e.kind != EventKind::Disjoint);
        CHECK(e.overlap > 0);
        CHECK(overlapping.contains({e.fromCommunity, e.toCommunity}));
      }
      CHECK(event_matrix(a, b, theta).size() ==
            static_cast<std::size_t>(a.community_count() * b.community_count()));
    }
  }
}

TEST_CASE("global labels") {
  SUBCASE("one community over three years keeps one label") {
    std::vector<Partition> ps{ranges(2020, {{0, 6}}), ranges(2021, {{0, 6}}), ranges(2022, {{0, 7}})};
    auto l = assign_global_labels(ps);
    CHECK(l.label(2020, 0) == l.label(2021, 0));
    CHECK(l.label(2021, 0) == l.label(2022, 0));
    CHECK(l.created.size() == 1);
  }
  SUBCASE("split: the larger branch inherits") {
    std::vector<Partition> ps{ranges(2020, {{0, 10}}), ranges(2021, {{0, 6}, {6, 10}})};
    auto l = assign_global_labels(ps);
    CHECK(l.label(2021, 0) == l.label(2020, 0));
    CHECK(l.label(2021, 1) != l.label(2020, 0));
    CHECK(l.created.size() == 2);
  }
  SUBCASE("merge: the larger source donates") {
    std::vector<Partition> ps{ranges(2020, {{0, 4}, {4, 10}}), ranges(2021, {{0, 10}})};
    auto l = assign_global_labels(ps);
    CHECK(l.label(2021, 0) == l.label(2020, 1));
  }
  SUBCASE("new community gets a fresh label with a log entry") {
    std::vector<Partition> ps{ranges(2020, {{0, 5}}), ranges(2021, {{0, 5}, {50, 55}})};
    auto l = assign_global_labels(ps);
    CHECK(l.label(2021, 0) == l.label(2020, 0));
    const auto fresh = l.label(2021, 1);
    CHECK(fresh != l.label(2020, 0));
    REQUIRE(l.created.size() == 2);
    CHECK(l.created.back().label == fresh);
    CHECK(l.created.back().year == 2021);
  }
  SUBCASE("mix targets get fresh labels") {
    std::vector<Partition> ps{ranges(2020, {{0, 10}}), ranges(2021, {{6, 16}})};
    auto l = assign_global_labels(ps);
    CHECK(l.label(2021, 0) != l.label(2020, 0));
  }
  SUBCASE("a gap in the years is an error") {
    std::vector<Partition> ps{ranges(2020, {{0, 5}}), ranges(2022, {{0, 5}})};
    try {
      assign_global_labels(ps);
      FAIL("expected MissingYear");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MissingYear);
      CHECK(std::string(e.what()).find("2021") != std::string::npos);
    }
  }
}

TEST_CASE("label timelines are connected and never shared") {
  Rng rng(17);
  for (int t = 0; t < 50; ++t) {
    std::vector<Partition> ps;
    for (int y = 0; y < 6; ++y) {
      std::map<std::string, int> a;
      const int k = 1 + static_cast<int>(rng.below(4));
      for (int i = 0; i < 25; ++i)
        if (rng.uniform() < 0.85) a[org(i)] = (i * k / 25 + (rng.uniform() < 0.2 ? 1 : 0)) % k;
      auto p = Partition::from_assignment(a);
      p.year = 2010 + y;
      ps.push_back(std::move(p));
    }
    auto l = assign_global_labels(ps);
    std::map<std::string, std::set<int>> years;
    for (const auto& p : ps) {
      std::set<std::string> seen;
      for (int c = 0; c < p.community_count(); ++c) {
        const auto& label = l.label(p.year, c);
        REQUIRE(!label.empty());
        CHECK(seen.insert(label).second);  // one community per label per year
        years[label].insert(p.year);
      }
    }
    for (const auto& [label, ys] : years)
      CHECK(*ys.rbegin() - *ys.begin() + 1 == static_cast<int>(ys.size()));
  }
}

TEST_CASE("community series") {
  auto p = ranges(2020, {{0, 2}, {2, 3}});
  std::vector<Partition> ps{p};
  auto l = assign_global_labels(ps);
  std::vector<CentralityRow> rows{{2020, org(0), 1, 3.0, 1, 1}, {2020, org(1), 1, 7.0, 1, 1},
                                  {2020, org(2), 1, 5.0, 1, 1}};

  auto all = community_series(l, ps, rows);
  REQUIRE(all.size() == 2);
  CHECK(all[0].label == l.label(2020, 0));
  CHECK(all[0].totalStrength == 10.0);
  CHECK(all[0].memberCount == 2);

  auto top = community_series(l, ps, rows, 1);
  REQUIRE(top.size() == 1);
  CHECK(top[0].totalStrength == 10.0);

  std::ostringstream out;
  write_series_csv(out, all);
  CHECK(out.str().rfind("globalLabel,year,totalStrength,memberCount\n", 0) == 0);
}

TEST_CASE("series totals are member strength sums") {
  Rng rng(29);
  std::vector<Partition> ps;
  std::vector<CentralityRow> rows;
  for (int y = 0; y < 4; ++y) {
    std::map<std::string, int> a;
    for (int i = 0; i < 20; ++i) {
      a[org(i)] = static_cast<int>(rng.below(3));
      rows.push_back({2000 + y, org(i), 1, rng.uniform() * 10, 1, 1});
    }
    auto p = Partition::from_assignment(a);
    p.year = 2000 + y;
    ps.push_back(std::move(p));
  }
  auto l = assign_global_labels(ps);
  std::map<std::pair<std::string, int>, double> want;
  for (const auto& r : rows) {
    for (const auto& p : ps)
      if (p.year == r.year) want[{l.label(r.year, p.community_of(r.orgID)), r.year}] += r.strength;
  }
  for (const auto& s : community_series(l, ps, rows))
    CHECK(s.totalStrength == doctest::Approx(want.at({s.label, s.year})).epsilon(1e-12));
}

TEST_CASE("exports") {
  auto a = ranges(2020, {{0, 10}});
  auto b = ranges(2021, {{0, 6}, {6, 10}});
  std::ostringstream ev, lab, log;
  write_events_csv(ev, match_communities(a, b));
  std::vector<Partition> ps{a, b};
  auto l = assign_global_labels(ps);
  write_label_map_csv(lab, l);
  write_label_log_csv(log, l);
  CHECK(ev.str() == "fromYear,fromCommunity,toCommunity,kind,overlap,jaccard\n"
                    "2020,0,0,split,6,0.6\n2020,0,1,split,4,0.4\n");
  CHECK(lab.str().rfind("year,localCommunity,globalLabel\n", 0) == 0);
  CHECK(log.str().find("G0002") != std::string::npos);
}

}  // TEST_SUITE
