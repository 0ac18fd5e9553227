#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace exkm;
using test::Driver;

namespace {

template <class S>
S& as(Driver& d) {
  return static_cast<S&>(*d.strategy);
}

// Moves every centroid by a small random step.
void jiggle(Driver& d, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  for (std::size_t j = 0; j < d.c.k; ++j) {
    std::vector<double> to(d.c.row(j).begin(), d.c.row(j).end());
    for (auto& x : to) x += n(rng);
    d.move(j, to);
  }
}

std::vector<index_t> brute_nearest(const DataMatrix& m, const CentroidState& c) {
  std::vector<index_t> out(m.n_samples());
  for (std::size_t i = 0; i < m.n_samples(); ++i) {
    double best = kInf;
    for (std::size_t j = 0; j < c.k; ++j) {
      const double d = distance(m.row(i), m.sq_norm(i), c.row(j), c.sq_norms[j]);
      if (d < best) {
        best = d;
        out[i] = static_cast<index_t>(j);
      }
    }
  }
  return out;
}

std::vector<index_t> sta_trajectory_end(const char* name, const DataMatrix& m, std::size_t k, std::uint64_t seed,
                                        std::size_t rounds) {
  RunConfig cfg;
  cfg.algorithm = name;
  cfg.k = k;
  cfg.seed = seed;
  cfg.max_rounds = rounds;
  cfg.record_trajectory = true;
  const RunResult r = run(cfg, m);
  std::vector<index_t> flat;
  for (const auto& a : r.trajectory.assignments) flat.insert(flat.end(), a.begin(), a.end());
  return flat;
}

}  // namespace

TEST(Sta, NearestAndTies) {
  Driver d(test::rows(1, {0.4, 0.5}), test::centroids(1, {0.0, 1.0}), make_strategy("sta"));
  const ChunkResult r = d.round();
  EXPECT_EQ(d.assignment[0], 0u);
  EXPECT_EQ(d.assignment[1], 0u);  // equidistant: lower index
  EXPECT_EQ(r.stats.dist_calcs_assign, 4u);

  Driver rev(test::rows(1, {0.5}), test::centroids(1, {1.0, 0.0}), make_strategy("sta"));
  rev.round();
  EXPECT_EQ(rev.assignment[0], 0u);
}

TEST(Sta, MatchesArgminScan) {
  const DataMatrix m = generate_gauss(200, 3, 4, 17);
  const CentroidState c = init_centroids(m, 7, 2);
  Driver d(m, c, make_strategy("sta"));
  const ChunkResult r = d.round();
  EXPECT_EQ(r.stats.dist_calcs_assign, 200u * 7);
  EXPECT_EQ(d.assignment, brute_nearest(m, c));
}

TEST(SelkRefresh, ZeroDisplacementIsIdentity) {
  Driver d(generate_gauss(30, 2, 2, 1), init_centroids(generate_gauss(30, 2, 2, 1), 4, 1), make_strategy("selk"));
  auto& b = as<SelkStrategy>(d).bounds();
  const double u = b.upper(3, d.assignment[3]);
  const double l = b.lower(3, 2);
  b.begin_sample(3, d.assignment[3], d.c, 1);
  EXPECT_EQ(b.upper(3, d.assignment[3]), u);
  EXPECT_EQ(b.lower(3, 2), l);
}

TEST(SelkRefresh, UpperGrowsByDisplacement) {
  Driver d(test::rows(1, {0.0}), test::centroids(1, {1.0, 5.0}), make_strategy("selk"));
  auto& b = as<SelkStrategy>(d).bounds();
  ASSERT_EQ(b.upper(0, 0), 1.0);
  d.c.p = {0.25, 0.5};
  b.begin_sample(0, 0, d.c, 1);
  EXPECT_EQ(b.upper(0, 0), 1.25);
  EXPECT_EQ(b.lower(0, 1), 4.5);
}

TEST(SelkRefresh, BoundsStayValid) {
  const DataMatrix m = generate_gauss(150, 4, 3, 5);
  for (const char* name : {"selk", "elk"}) {
    Driver d(m, init_centroids(m, 9, 5), make_strategy(name));
    std::mt19937_64 rng(1);
    for (int r = 1; r <= 6; ++r) {
      jiggle(d, rng, 0.3);
      auto& b = as<SelkStrategy>(d).bounds();
      if (std::string(name) == "selk") {
        for (std::size_t i = 0; i < m.n_samples(); ++i) b.begin_sample(static_cast<index_t>(i), d.assignment[i], d.c, r);
        EXPECT_TRUE(d.audit(r).empty()) << name << " round " << r;
        // undo so the round below refreshes exactly once
        for (std::size_t i = 0; i < m.n_samples(); ++i) {
          b.raw_upper(static_cast<index_t>(i)) -= d.c.p[d.assignment[i]];
          for (std::size_t j = 0; j < 9; ++j) b.raw_lower(static_cast<index_t>(i), static_cast<index_t>(j)) += d.c.p[j];
        }
      }
      d.round(r);
      EXPECT_TRUE(d.audit(r).empty()) << name << " round " << r;
      EXPECT_EQ(d.assignment, brute_nearest(m, d.c));
    }
  }
}

TEST(Selk, SkipWithoutDistance) {
  // x = 0, c = {0.5, 0.8}: u = 0.5, and l(i,1) is lowered to 0.7.
  Driver d(test::rows(1, {0.0}), test::centroids(1, {0.5, 0.8}), make_strategy("selk"));
  as<SelkStrategy>(d).bounds().raw_lower(0, 1) = 0.7;
  const ChunkResult r = d.round();
  EXPECT_EQ(r.stats.dist_calcs_assign, 0u);
  EXPECT_EQ(d.assignment[0], 0u);
}

TEST(Selk, StaticCentroidsCostNothing) {
  const DataMatrix m = generate_gauss(300, 5, 4, 2);
  for (const char* name : {"selk", "elk", "selk-ns", "elk-ns"}) {
    Driver d(m, init_centroids(m, 10, 3), make_strategy(name));
    EXPECT_EQ(d.round().stats.dist_calcs_assign, 0u) << name;
  }
}

TEST(Selk, TrajectoryEqualsStandard) {
  const DataMatrix m = generate_gauss(300, 5, 6, 8);
  EXPECT_EQ(sta_trajectory_end("selk", m, 10, 4, 20), sta_trajectory_end("sta", m, 10, 4, 20));
}

TEST(Elk, OuterTestSkipsSample) {
  // u = 0.4, s(a) = 1.0.
  Driver d(test::rows(1, {0.0}), test::centroids(1, {0.4, 1.4}), make_strategy("elk"));
  const std::vector<char> sel{1};
  AuditSink sink(&sel);
  const ChunkResult r = d.round(1, &sink);
  EXPECT_EQ(r.stats.dist_calcs_assign, 0u);
  ASSERT_EQ(sink.events().size(), 1u);
  EXPECT_EQ(sink.events()[0].kind, AuditSink::Kind::keep);
}

TEST(Elk, CentroidDistanceSkip) {
  // u = 0.6, cc(0,1) = 2.0, l(i,1) = 0.1; centroid 2 keeps s(0) small.
  Driver d(test::rows(1, {0.0}), test::centroids(1, {0.6, 2.6, 1.1}), make_strategy("elk"));
  as<ElkStrategy>(d).bounds().raw_lower(0, 1) = 0.1;
  const std::vector<char> sel{1};
  AuditSink sink(&sel);
  const ChunkResult r = d.round(1, &sink);
  EXPECT_EQ(r.stats.dist_calcs_assign, 0u);
  ASSERT_EQ(sink.events().size(), 2u);
  EXPECT_EQ(sink.events()[0].kind, AuditSink::Kind::skip);
  EXPECT_EQ(sink.events()[0].centroid, 1u);
  EXPECT_EQ(r.stats.dist_calcs_centroid, 3u);  // k(k-1)/2
}

TEST(Elk, NeverComputesWhatSelkWouldSkip) {
  // From identical bounds, elk's extra tests only remove work.
  const DataMatrix m = generate_gauss(400, 3, 5, 31);
  const CentroidState c = init_centroids(m, 15, 31);
  Driver selk(m, c, make_strategy("selk"));
  Driver elk(m, c, make_strategy("elk"));
  std::mt19937_64 r1(9), r2(9);
  jiggle(selk, r1, 0.5);
  jiggle(elk, r2, 0.5);
  const auto a = selk.round();
  const auto b = elk.round();
  EXPECT_LE(b.stats.dist_calcs_assign, a.stats.dist_calcs_assign);
  EXPECT_EQ(selk.assignment, elk.assignment);
}

TEST(Elk, TrajectoryEqualsStandard) {
  const DataMatrix m = generate_gauss(300, 5, 6, 9);
  EXPECT_EQ(sta_trajectory_end("elk", m, 10, 4, 1000), sta_trajectory_end("sta", m, 10, 4, 1000));
}

TEST(Ham, BoundTestPasses) {
  // l = 0.9, s(a) = 0.4, u = 0.5.
  Driver d(test::rows(1, {0.0}), test::centroids(1, {0.5, 0.9}), make_strategy("ham"));
  EXPECT_EQ(d.round().stats.dist_calcs_assign, 0u);
}

TEST(Ham, FailurePathCostsK) {
  Driver d(test::rows(1, {0.0}), test::centroids(1, {1.0, 1.5, 3.0, 5.0}), make_strategy("ham"));
  as<HamStrategy>(d).bounds().raw_lower(0) = 0.0;
  const ChunkResult r = d.round();
  EXPECT_EQ(r.stats.dist_calcs_assign, 4u);
  EXPECT_EQ(as<HamStrategy>(d).bounds().upper(0, 0), 1.0);
  EXPECT_EQ(as<HamStrategy>(d).bounds().lower(0, 0), 1.5);
}

TEST(Ham, RefreshUsesLargestOtherDisplacement) {
  Driver d(test::rows(1, {0.0}), test::centroids(1, {1.0, 4.0, 6.0}), make_strategy("ham"));
  auto& b = as<HamStrategy>(d).bounds();
  d.c.p = {0.5, 0.25, 0.125};
  RoundStats st;
  b.prepare_round(d.c, 1, st);
  b.begin_sample(0, 0, d.c, 1);
  EXPECT_EQ(b.upper(0, 0), 1.5);
  EXPECT_EQ(b.lower(0, 0), 4.0 - 0.25);  // max over j != a, not the global max
}

TEST(AnnularCandidates, Examples) {
  const CentroidState c = test::centroids(1, {0, 1, 3, 7});
  const SortedNorms s = SortedNorms::of(c);
  const auto j = annular_candidates(0.4, s, 0.6);
  EXPECT_EQ(std::vector<index_t>(j.begin(), j.end()), (std::vector<index_t>{0, 1}));
  EXPECT_EQ(annular_candidates(0.4, s, 1e9).size(), 4u);
}

TEST(AnnularCandidates, MatchesLinearScan) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5, 5);
  std::vector<double> v(20 * 3);
  for (auto& x : v) x = u(rng);
  const CentroidState c = test::centroids(3, v);
  const SortedNorms s = SortedNorms::of(c);
  for (int q = 0; q < 100; ++q) {
    const double xn = std::abs(u(rng)) * 1.5;
    const double r = std::abs(u(rng));
    const auto got = annular_candidates(xn, s, r);
    std::set<index_t> a(got.begin(), got.end()), b;
    for (std::size_t j = 0; j < 20; ++j)
      if (std::abs(std::sqrt(c.sq_norms[j]) - xn) <= r) b.insert(static_cast<index_t>(j));
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.size(), got.size());
  }
}

TEST(Ann, CostIsCandidateCount) {
  // x = 0.5 ties c0 = 0 and c1 = 1, so the bound test fails; the band
  // |‖c‖ - 0.5| <= 0.5 holds {0, 1, 2}, the rest of the k = 100 lie beyond.
  std::vector<double> cs{0.0, 1.0, -1.0};
  for (int j = 3; j < 100; ++j) cs.push_back(j);
  Driver d(test::rows(1, {0.5}), test::centroids(1, cs), make_strategy("ann"));
  EXPECT_EQ(as<AnnStrategy>(d).second(0), 1u);
  const std::vector<char> sel{1};
  AuditSink sink(&sel);
  const ChunkResult r = d.round(1, &sink);
  // tightening d(a), then d(b), then the one remaining band member
  EXPECT_EQ(r.stats.dist_calcs_assign, 3u);
  ASSERT_EQ(sink.events().size(), 1u);
  EXPECT_EQ(sink.events()[0].members.size(), 3u);
  EXPECT_EQ(d.assignment[0], 0u);
}

TEST(Ann, WideBandMatchesHam) {
  const DataMatrix m = test::rows(1, {0.5});
  const CentroidState c = test::centroids(1, {0.0, 1.0, -1.0});
  Driver ann(m, c, make_strategy("ann"));
  Driver ham(m, c, make_strategy("ham"));
  EXPECT_EQ(ann.round().stats.dist_calcs_assign, ham.round().stats.dist_calcs_assign);
  EXPECT_EQ(ann.assignment, ham.assignment);
}

TEST(Ann, SecondNearestRecorded) {
  const DataMatrix m = generate_gauss(200, 2, 3, 12);
  Driver d(m, init_centroids(m, 12, 12), make_strategy("ann"));
  std::mt19937_64 rng(2);
  for (int r = 1; r <= 4; ++r) {
    jiggle(d, rng, 0.4);
    d.round(r);
    EXPECT_TRUE(d.audit(r).empty());
    EXPECT_EQ(d.assignment, brute_nearest(m, d.c));
    for (std::size_t i = 0; i < 200; ++i) EXPECT_LT(as<AnnStrategy>(d).second(static_cast<index_t>(i)), 12u);
  }
}

TEST(Exp, LargeRadiusSearchesAll) {
  Driver d(test::rows(1, {-20.0}), test::centroids(1, {0, 1, 3, 7}), make_strategy("exp"));
  as<ExpStrategy>(d).bounds().raw_lower(0) = 0.0;
  EXPECT_EQ(d.round().stats.dist_calcs_assign, 4u);
}

TEST(Exp, CandidatesHoldNearestTwo) {
  const DataMatrix m = generate_gauss(300, 2, 5, 14);
  Driver d(m, init_centroids(m, 40, 1), make_strategy("exp"));
  std::mt19937_64 rng(5);
  std::vector<char> sel(300, 1);
  for (int r = 1; r <= 5; ++r) {
    jiggle(d, rng, 0.6);
    AuditSink sink(&sel);
    d.round(r, &sink);
    EXPECT_EQ(d.assignment, brute_nearest(m, d.c));
    for (const auto& ev : sink.events()) {
      if (ev.kind != AuditSink::Kind::candidates) continue;
      std::vector<double> dist(40);
      for (std::size_t j = 0; j < 40; ++j) dist[j] = test::naive_distance(m.row(ev.sample), d.c.row(j));
      const NearestTwo nt = nearest_two(dist);
      EXPECT_NE(std::find(ev.members.begin(), ev.members.end(), nt.j1), ev.members.end());
      EXPECT_NE(std::find(ev.members.begin(), ev.members.end(), nt.j2), ev.members.end());
    }
  }
}

TEST(Hamerly, TrajectoriesEqualStandard) {
  const DataMatrix m = generate_gauss(400, 3, 6, 10);
  const auto ref = sta_trajectory_end("sta", m, 16, 6, 1000);
  for (const char* name : {"ham", "ann", "exp"}) EXPECT_EQ(sta_trajectory_end(name, m, 16, 6, 1000), ref) << name;
}

TEST(Syin, OuterPassCostsNothing) {
  const DataMatrix m = generate_gauss(200, 3, 4, 6);
  Driver d(m, init_centroids(m, 30, 6), make_strategy("syin"));
  EXPECT_EQ(d.round().stats.dist_calcs_assign, 0u);
}

TEST(Syin, SingleGroupFailureCostsK) {
  StrategyOptions opts;
  opts.group_count_override = 1;
  Driver syin(test::rows(1, {0.0}), test::centroids(1, {1.0, 1.5, 3.0, 5.0}), make_strategy("syin"), opts);
  as<SyinStrategy>(syin).bounds().raw_group_lower(0, 0) = 0.0;
  Driver ham(test::rows(1, {0.0}), test::centroids(1, {1.0, 1.5, 3.0, 5.0}), make_strategy("ham"));
  as<HamStrategy>(ham).bounds().raw_lower(0) = 0.0;
  EXPECT_EQ(syin.round().stats.dist_calcs_assign, 4u);
  EXPECT_EQ(ham.round().stats.dist_calcs_assign, 4u);
}

TEST(Syin, GroupsPartitionCentroids) {
  const DataMatrix m = generate_gauss(500, 4, 5, 3);
  const CentroidState c = init_centroids(m, 47, 3);
  RoundStats st;
  const GroupState g = build_groups(c, default_group_count(47), 3, st);
  EXPECT_LE(g.group_count(), 4u);
  EXPECT_GE(g.group_count(), 1u);
  std::vector<int> seen(47, 0);
  for (std::size_t f = 0; f < g.group_count(); ++f) {
    EXPECT_FALSE(g.members[f].empty());
    for (index_t j : g.members[f]) {
      ++seen[j];
      EXPECT_EQ(g.group_of[j], f);
    }
  }
  for (int s : seen) EXPECT_EQ(s, 1);
  EXPECT_EQ(default_group_count(5), 1u);
  EXPECT_EQ(default_group_count(100), 10u);
}

TEST(Syin, TrajectoryEqualsStandard) {
  const DataMatrix m = generate_gauss(400, 3, 6, 11);
  const auto ref = sta_trajectory_end("sta", m, 40, 2, 1000);
  for (const char* name : {"syin", "yin"}) EXPECT_EQ(sta_trajectory_end(name, m, 40, 2, 1000), ref) << name;
}

TEST(Yin, LocalFilterExamples) {
  EXPECT_TRUE(yin_local_skip(2.0, 0.5, 0.1, 1.2));
  // p(j) = q(f): degenerates to l > r2
  EXPECT_TRUE(yin_local_skip(1.3, 0.4, 0.4, 1.2));
  EXPECT_FALSE(yin_local_skip(1.1, 0.4, 0.4, 1.2));
}

TEST(Yin, NeverCostsMoreThanSyin) {
  const DataMatrix m = generate_gauss(2000, 2, 10, 19);
  RunConfig cfg;
  cfg.k = 60;
  cfg.seed = 19;
  cfg.algorithm = "syin";
  const RunResult a = run(cfg, m);
  cfg.algorithm = "yin";
  const RunResult b = run(cfg, m);
  ASSERT_EQ(a.rounds_executed, b.rounds_executed);
  EXPECT_EQ(a.final_assignments, b.final_assignments);
  for (std::size_t t = 0; t < a.rounds_executed; ++t)
    EXPECT_LE(b.per_round_stats[t].dist_calcs_assign, a.per_round_stats[t].dist_calcs_assign) << t;
}
