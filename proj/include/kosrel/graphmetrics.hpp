#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "kosrel/article_nodes.hpp"
#include "kosrel/aspect.hpp"
#include "kosrel/citegraph.hpp"
#include "kosrel/error.hpp"
#include "kosrel/hierarchy.hpp"
#include "kosrel/parallel.hpp"

namespace kosrel {

/// Per-article metric values, aligned with the graph's ascending ids.
struct ArticleScores {
  std::vector<ArticleId> ids;
  std::vector<double> values;
  /// Number of articles in the citation network the scores came from.
  std::size_t graph_size_m = 0;
};

/// Tree node -> aggregated article metric (the seeds of propagation).
using NodeSeedScores = NodeValues;

namespace detail {

/// Scratch marks for one disruption worker. Epoch stamping avoids clearing.
struct DisruptionScratch {
  std::vector<std::uint32_t> reference;  // member of the focal's references
  std::vector<std::uint32_t> citer;      // cites the focal
  std::vector<std::uint32_t> seen_k;     // already counted in the k-set
  std::uint32_t epoch = 0;

  explicit DisruptionScratch(std::size_t n) : reference(n, 0), citer(n, 0), seen_k(n, 0) {}

  std::uint32_t next_epoch() {
    if (++epoch == 0) {
      std::fill(reference.begin(), reference.end(), 0);
      std::fill(citer.begin(), citer.end(), 0);
      std::fill(seen_k.begin(), seen_k.end(), 0);
      epoch = 1;
    }
    return epoch;
  }
};

inline double disruption_at(const CitationGraph& g, CitationGraph::Index focal,
                            DisruptionScratch& s) {
  const auto e = s.next_epoch();
  const auto refs = g.cited_by(focal);
  for (auto p : refs) s.reference[p] = e;

  std::uint64_t n_i = 0, n_j = 0, n_k = 0;
  for (auto c : g.citers_of(focal)) {
    s.citer[c] = e;
    bool cites_reference = false;
    for (auto r : g.cited_by(c))
      if (s.reference[r] == e) {
        cites_reference = true;
        break;
      }
    ++(cites_reference ? n_j : n_i);
  }
  for (auto p : refs)
    for (auto x : g.citers_of(p)) {
      if (x == focal || s.citer[x] == e || s.seen_k[x] == e) continue;
      s.seen_k[x] = e;
      ++n_k;
    }
  const auto denom = n_i + n_j + n_k;
  if (denom == 0) return 0.0;
  return (static_cast<double>(n_i) - static_cast<double>(n_j)) / static_cast<double>(denom);
}

}  // namespace detail

/// Disruption index of one article:
///   i = citers of the focal that cite none of its references,
///   j = citers of the focal that cite at least one reference,
///   k = citers of some reference that do not cite the focal (focal excluded),
///   D = (n_i - n_j) / (n_i + n_j + n_k), 0 when the denominator is 0.
inline double disruption_of(const CitationGraph& g, ArticleId focal) {
  auto idx = g.index_of(focal);
  if (!idx) throw Error("article " + std::to_string(focal) + " is not in the citation graph");
  detail::DisruptionScratch scratch(g.node_count());
  return detail::disruption_at(g, *idx, scratch);
}

/// Disruption of every node.
inline ArticleScores disruption_all(const CitationGraph& g, unsigned threads = 1) {
  ArticleScores out;
  out.ids.assign(g.ids().begin(), g.ids().end());
  out.values.assign(g.node_count(), 0.0);
  out.graph_size_m = g.node_count();

  std::vector<std::unique_ptr<detail::DisruptionScratch>> pool;
  std::mutex pool_mutex;
  auto acquire = [&] {
    std::lock_guard lock(pool_mutex);
    if (pool.empty()) return std::make_unique<detail::DisruptionScratch>(g.node_count());
    auto s = std::move(pool.back());
    pool.pop_back();
    return s;
  };
  parallel_blocks(g.node_count(), 4096, threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
    auto scratch = acquire();
    for (auto i = lo; i < hi; ++i)
      out.values[i] = detail::disruption_at(g, static_cast<CitationGraph::Index>(i), *scratch);
    std::lock_guard lock(pool_mutex);
    pool.push_back(std::move(scratch));
  });
  return out;
}

struct PageRankOptions {
  double alpha = 0.85;
  double tol = 1e-9;
  int max_iter = 200;
};

struct PageRankResult {
  ArticleScores scores;
  bool converged = false;
  int iterations = 0;
  /// L1 change of the last iteration.
  double delta = 0.0;
};

/// Iterates x_i <- alpha * sum_{j cites i} x_j / outdeg(j) + (1 - alpha) from
/// x = 1 until the L1 change drops below tol. Dangling nodes pass nothing on.
inline PageRankResult pagerank(const CitationGraph& g, const PageRankOptions& opt = {},
                               unsigned threads = 1) {
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw Error("pagerank alpha must lie in (0, 1)");
  const std::size_t n = g.node_count();
  const double beta = 1.0 - opt.alpha;
  constexpr std::size_t kBlock = 8192;
  const std::size_t n_blocks = (n + kBlock - 1) / kBlock;

  std::vector<double> x(n, 1.0), next(n), share(n);
  std::vector<double> block_delta(n_blocks);
  PageRankResult r;
  for (int it = 0; it < opt.max_iter; ++it) {
    parallel_blocks(n, kBlock, threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
      for (auto j = lo; j < hi; ++j) {
        const auto d = g.out_degree(static_cast<CitationGraph::Index>(j));
        share[j] = d ? x[j] / static_cast<double>(d) : 0.0;
      }
    });
    parallel_blocks(n, kBlock, threads, [&](std::size_t b, std::size_t lo, std::size_t hi) {
      double delta = 0.0;
      for (auto i = lo; i < hi; ++i) {
        double sum = 0.0;
        for (auto j : g.citers_of(static_cast<CitationGraph::Index>(i))) sum += share[j];
        next[i] = opt.alpha * sum + beta;
        delta += std::abs(next[i] - x[i]);
      }
      block_delta[b] = delta;
    });
    double delta = 0.0;
    for (double d : block_delta) delta += d;
    x.swap(next);
    r.iterations = it + 1;
    r.delta = delta;
    if (delta < opt.tol) {
      r.converged = true;
      break;
    }
  }
  if (n == 0) r.converged = true;
  r.scores.ids.assign(g.ids().begin(), g.ids().end());
  r.scores.values = std::move(x);
  r.scores.graph_size_m = n;
  return r;
}

/// value[c] = (sum of scores of articles directly mapped to c) / m.
/// Nodes without a mapped article are absent.
inline NodeSeedScores aggregate_to_nodes(const ArticleScores& scores,
                                         const ArticleNodeIndex& mapping, const Hierarchy& h) {
  if (scores.graph_size_m == 0) throw Error("aggregation needs a non-empty citation network");
  std::vector<double> sum(h.size(), 0.0);
  std::vector<char> touched(h.size(), 0);
  for (std::size_t a = 0; a < scores.ids.size(); ++a)
    for (auto node : mapping.nodes_of(scores.ids[a])) {
      sum[node] += scores.values[a];
      touched[node] = 1;
    }
  NodeSeedScores out;
  const double m = static_cast<double>(scores.graph_size_m);
  for (Hierarchy::Index i = 0; i < h.size(); ++i)
    if (touched[i]) out.emplace_hint(out.end(), h.code(i), sum[i] / m);
  return out;
}

/// Same rule over an explicit article -> tree codes map.
inline NodeSeedScores aggregate_to_nodes(const ArticleScores& scores,
                                         const std::map<ArticleId, std::vector<TreeCode>>& mapping) {
  if (scores.graph_size_m == 0) throw Error("aggregation needs a non-empty citation network");
  NodeSeedScores sum;
  for (std::size_t a = 0; a < scores.ids.size(); ++a) {
    auto it = mapping.find(scores.ids[a]);
    if (it == mapping.end()) continue;
    for (const auto& code : it->second) sum[code] += scores.values[a];
  }
  for (auto& [code, v] : sum) v /= static_cast<double>(scores.graph_size_m);
  return sum;
}

}  // namespace kosrel
