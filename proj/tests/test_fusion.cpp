#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <numeric>

#include "kosrel/fusion.hpp"
#include "kosrel/rng.hpp"

using namespace kosrel;

namespace {

TreeCode tc(const char* s) { return TreeCode::parse(s); }

std::vector<TreeCode> codes(int n) {
  std::vector<TreeCode> out;
  for (int i = 0; i < n; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "C%02d", i + 1);
    out.push_back(TreeCode::parse(buf));
  }
  return out;
}

}  // namespace

TEST(RankByAspect, Basics) {
  EXPECT_EQ(rank_by_aspect({{tc("A"), 0.9}, {tc("B"), 0.1}}), (Ranks{{tc("A"), 1}, {tc("B"), 2}}));
  EXPECT_EQ(rank_by_aspect({{tc("B"), 0.5}, {tc("A"), 0.5}}), (Ranks{{tc("A"), 1}, {tc("B"), 2}}));
  EXPECT_EQ(rank_by_aspect({{tc("A"), -0.3}, {tc("B"), 0.2}}), (Ranks{{tc("A"), 2}, {tc("B"), 1}}));
}

TEST(RrfFuse, ClosedForms) {
  std::array<Ranks, 4> all_first;
  all_first.fill({{tc("A"), 1}});
  EXPECT_NEAR(rrf_fuse(all_first).rrf.at(tc("A")), 4.0 / 61.0, 1e-15);
  EXPECT_NEAR(rrf_fuse(all_first).rrf.at(tc("A")), 0.065574, 5e-7);

  std::array<Ranks, 4> spread{Ranks{{tc("A"), 1}}, Ranks{{tc("A"), 2}}, Ranks{{tc("A"), 3}}, Ranks{{tc("A"), 4}}};
  // 1/61 + 1/62 + 1/63 + 1/64, evaluated exactly
  EXPECT_NEAR(rrf_fuse(spread).rrf.at(tc("A")), 0.064020, 5e-7);
  EXPECT_THROW(rrf_fuse(spread, 0), Error);
}

TEST(RrfFuse, MissingNodeContributesNothing) {
  std::array<Ranks, 2> r{Ranks{{tc("A"), 1}, {tc("B"), 2}}, Ranks{{tc("A"), 1}}};
  auto f = rrf_fuse(r);
  EXPECT_NEAR(f.rrf.at(tc("B")), 1.0 / 62.0, 1e-15);
  EXPECT_EQ(f.rank.at(tc("A")), 1);
}

TEST(RrfFuse, ComplementaryRanksExhaustive) {
  // X holds rank 1 in three aspects and rank 2 in one; Y the complement
  for (int odd = 0; odd < 4; ++odd) {
    std::array<Ranks, 4> r;
    for (int a = 0; a < 4; ++a) {
      const bool x_first = a != odd;
      r[static_cast<std::size_t>(a)] = {{tc("Y"), x_first ? 2 : 1}, {tc("X"), x_first ? 1 : 2}};
    }
    auto f = rrf_fuse(r);
    EXPECT_EQ(f.rank.at(tc("X")), 1);
    EXPECT_GT(f.rrf.at(tc("X")), f.rrf.at(tc("Y")));
  }
}

TEST(RerankLevel, SlicesGlobalScores) {
  auto g = ranking_from_values({{tc("A"), 0.3}, {tc("A01"), 0.5}, {tc("B01"), 0.4}, {tc("B"), 0.6}}, Month(2014, 1));
  auto l2 = rerank_level(g, 2);
  EXPECT_EQ(l2.scope(), "level-2");
  EXPECT_EQ(l2.ordered(), (std::vector{tc("A01"), tc("B01")}));
  EXPECT_EQ(g.scope(), "global");
  EXPECT_EQ(g.ordered().front(), tc("B"));
}

TEST(TrendSlope, Examples) {
  std::vector<double> a{5, 3, 3, 1}, b{2, 2, 2}, c{1, 2}, d{1};
  EXPECT_NEAR(rank_trend_slope(a), -1.3333, 5e-5);
  EXPECT_EQ(rank_trend_slope(b), 0.0);
  EXPECT_EQ(rank_trend_slope(c), 1.0);
  EXPECT_THROW(rank_trend_slope(d), Error);
}

TEST(TopK, ClampAndOrder) {
  auto r = ranking_from_values({{tc("A"), 0.3}, {tc("B"), 0.2}, {tc("C"), 0.1}}, Month(2014, 1));
  EXPECT_EQ(top_k(r, 10).size(), 3u);
  EXPECT_EQ(top_k(r, 1), std::vector{tc("A")});
  EXPECT_EQ(bottom_k(r, 1), std::vector{tc("C")});
  EXPECT_THROW(top_k(r, 0), Error);
}

TEST(TopK, AverageRanks) {
  std::vector<RelevanceRanking> months;
  for (auto [a, b] : std::vector<std::pair<double, double>>{{2, 1}, {2, 1}, {1, 2}})
    months.push_back(ranking_from_values({{tc("A"), a}, {tc("B"), b}}, Month(2014, 1)));
  auto avg = average_ranks(months);
  EXPECT_NEAR(avg.at(tc("A")), 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(avg.at(tc("B")), 5.0 / 3.0, 1e-12);
  EXPECT_EQ(top_k_by_average(avg, 1).front().first, tc("A"));
  EXPECT_EQ(bottom_k_by_average(avg, 1).front().first, tc("B"));
}

TEST(FusionProperties, RanksAreBijectiveAndOrdered) {
  Rng rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(60));
    auto cs = codes(n);
    NodeValues v;
    for (const auto& c : cs) v[c] = static_cast<double>(rng.below(10));  // plenty of ties
    auto r = rank_by_aspect(v);
    std::vector<TreeCode> by_rank(static_cast<std::size_t>(n));
    for (const auto& [c, k] : r) {
      ASSERT_GE(k, 1);
      ASSERT_LE(k, n);
      by_rank[static_cast<std::size_t>(k - 1)] = c;
    }
    for (std::size_t i = 1; i < by_rank.size(); ++i) {
      EXPECT_GE(v.at(by_rank[i - 1]), v.at(by_rank[i]));
      if (v.at(by_rank[i - 1]) == v.at(by_rank[i])) EXPECT_LT(by_rank[i - 1], by_rank[i]);
    }
  }
}

TEST(FusionProperties, MonotoneAndBounded) {
  Rng rng(52);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(30));
    auto cs = codes(n);
    std::array<Ranks, 4> r;
    for (auto& ranks : r) {
      std::vector<int> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), 1);
      rng.shuffle(std::span(perm));
      for (int i = 0; i < n; ++i) ranks[cs[static_cast<std::size_t>(i)]] = perm[static_cast<std::size_t>(i)];
    }
    auto f = rrf_fuse(r);
    for (const auto& [c, v] : f.rrf) {
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, 4.0 / 61.0);
    }
    auto improved = r;
    auto& aspect = improved[rng.below(4)];
    const auto& d = cs[rng.below(static_cast<std::uint64_t>(n))];
    if (aspect.at(d) == 1) continue;
    aspect[d] -= 1;
    EXPECT_GT(rrf_fuse(improved).rrf.at(d), f.rrf.at(d));
  }
}
