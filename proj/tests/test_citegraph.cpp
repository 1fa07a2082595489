#include <gtest/gtest.h>

#include <sstream>

#include "kosrel/citegraph.hpp"
#include "test_support.hpp"

using namespace kosrel;

namespace {

ArticleStore monthly_store(int n, int per_month) {
  std::vector<Article> arts;
  for (int i = 0; i < n; ++i) {
    Article a;
    a.id = static_cast<ArticleId>(i);
    a.month = Month(2014, 1) + i / per_month;
    arts.push_back(a);
  }
  return ArticleStore(arts);
}

}  // namespace

TEST(CitationGraph, Neighbours) {
  auto store = monthly_store(4, 10);
  std::vector<Edge> edges{{1, 2}, {3, 1}};
  auto g = build_graph(edges, store);
  EXPECT_EQ(g.successors_of(1), std::vector<ArticleId>{2});
  EXPECT_EQ(g.predecessors_of(1), std::vector<ArticleId>{3});
  EXPECT_TRUE(g.has_edge(1, 2));
  EXPECT_FALSE(g.has_edge(2, 1));
  EXPECT_THROW(g.successors_of(99), Error);
}

TEST(CitationGraph, DropsSelfLoopsDuplicatesAndUnknowns) {
  auto store = monthly_store(4, 10);
  std::vector<Edge> edges{{1, 1}, {1, 2}, {1, 2}, {1, 77}};
  auto g = build_graph(edges, store);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(g.build_stats().self_loops, 1u);
  EXPECT_EQ(g.build_stats().duplicates, 1u);
  EXPECT_EQ(g.build_stats().unknown_endpoints, 1u);
}

TEST(CitationGraph, ParseCitations) {
  std::istringstream in("# citing\tcited\n1\t2\n\n3\t1\n");
  auto e = parse_citations(in);
  EXPECT_EQ(e, (std::vector<Edge>{{1, 2}, {3, 1}}));
  std::istringstream bad("1\t2\nx\t3\n");
  try {
    parse_citations(bad);
    FAIL();
  } catch (const ParseError& err) {
    EXPECT_EQ(err.line(), 2u);
  }
}

TEST(CitationGraph, CacheRoundTrip) {
  Rng rng(8);
  auto g = testing_support::graph_from(200, oracle::random_digraph(rng, 200, 0.03));
  std::stringstream buf;
  g.write_cache(buf);
  EXPECT_EQ(CitationGraph::read_cache(buf), g);
  std::stringstream junk("not a cache");
  EXPECT_THROW(CitationGraph::read_cache(junk), Error);
}

TEST(Snapshot, EmptyAndFull) {
  auto store = monthly_store(30, 10);
  Rng rng(1);
  auto g = testing_support::graph_from(30, oracle::random_temporal_dag(rng, 30, 0.2));
  EXPECT_EQ(cumulative_snapshot(g, store, Month(2013, 12)).node_count(), 0u);
  EXPECT_EQ(cumulative_snapshot(g, store, Month(2020, 1)), g);
}

TEST(SnapshotProperties, MonotoneInMonth) {
  auto store = monthly_store(300, 25);
  Rng rng(2);
  auto g = testing_support::graph_from(300, oracle::random_temporal_dag(rng, 300, 0.02));
  auto prev = cumulative_snapshot(g, store, Month(2014, 1));
  for (int k = 1; k < 12; ++k) {
    auto cur = cumulative_snapshot(g, store, Month(2014, 1) + k);
    EXPECT_LE(prev.node_count(), cur.node_count());
    for (const auto& e : prev.edges()) EXPECT_TRUE(cur.has_edge(e.citing, e.cited));
    for (auto id : prev.ids()) EXPECT_TRUE(cur.contains(id));
    prev = std::move(cur);
  }
}

TEST(Sampling, SizeAndFractionBounds) {
  Rng rng(4);
  auto g = testing_support::graph_from(101, oracle::random_digraph(rng, 101, 0.05));
  EXPECT_EQ(sample_nodes(g, 0.1, 7).node_count(), 10u);
  EXPECT_EQ(sample_nodes(g, 1.0, 7), g);
  EXPECT_THROW(sample_nodes(g, 0.0, 7), Error);
  EXPECT_THROW(sample_nodes(g, 1.5, 7), Error);
  EXPECT_EQ(sample_nodes(g, 0.3, 99), sample_nodes(g, 0.3, 99));
  EXPECT_NE(sample_nodes(g, 0.3, 99), sample_nodes(g, 0.3, 100));
}

TEST(SamplingProperties, InducedSubgraph) {
  Rng rng(6);
  auto g = testing_support::graph_from(400, oracle::random_digraph(rng, 400, 0.02));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = sample_nodes(g, 0.25, seed);
    std::size_t expected_edges = 0;
    for (const auto& e : g.edges())
      if (s.contains(e.citing) && s.contains(e.cited)) {
        ++expected_edges;
        EXPECT_TRUE(s.has_edge(e.citing, e.cited));
      }
    EXPECT_EQ(s.edge_count(), expected_edges);
  }
}

TEST(SamplingProperties, EdgeRetentionIsFractionSquared) {
  Rng rng(12);
  const int n = 10'000;
  oracle::EdgeList edges;
  for (int u = 0; u < n; ++u)
    for (int k = 0; k < 10; ++k) {
      int v = static_cast<int>(rng.below(n));
      if (v != u) edges.emplace_back(u, v);
    }
  auto g = testing_support::graph_from(n, edges);
  const double f = 0.3;
  double retained = 0;
  const int seeds = 5;
  for (int seed = 0; seed < seeds; ++seed)
    retained += static_cast<double>(sample_nodes(g, f, static_cast<std::uint64_t>(seed)).edge_count());
  const double ratio = retained / seeds / static_cast<double>(g.edge_count());
  EXPECT_NEAR(ratio, f * f, 0.2 * f * f);
}
