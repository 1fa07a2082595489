#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kosrel/corpus.hpp"
#include "kosrel/error.hpp"
#include "kosrel/month.hpp"
#include "kosrel/rng.hpp"
#include "kosrel/text.hpp"

namespace kosrel {

struct Edge {
  ArticleId citing = 0;
  ArticleId cited = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct GraphBuildStats {
  std::size_t self_loops = 0;
  std::size_t unknown_endpoints = 0;
  std::size_t duplicates = 0;
};

/// Directed citation graph in compressed adjacency form. Edges run
/// citing -> cited. Node indices are dense and follow ascending article id.
class CitationGraph {
 public:
  using Index = std::uint32_t;

  CitationGraph() : out_offsets_(1, 0), in_offsets_(1, 0) {}

  /// `ids` must be ascending and unique; edges are index pairs into `ids`.
  /// Self loops and duplicate pairs are removed and counted.
  static CitationGraph from_index_edges(std::vector<ArticleId> ids,
                                        std::vector<std::pair<Index, Index>> edges,
                                        GraphBuildStats stats = {}) {
    CitationGraph g;
    const auto before = edges.size();
    std::erase_if(edges, [](const auto& e) { return e.first == e.second; });
    stats.self_loops += before - edges.size();
    std::sort(edges.begin(), edges.end());
    const auto sorted_size = edges.size();
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    stats.duplicates += sorted_size - edges.size();

    const std::size_t n = ids.size();
    g.ids_ = std::move(ids);
    g.out_offsets_.assign(n + 1, 0);
    g.in_offsets_.assign(n + 1, 0);
    for (const auto& [u, v] : edges) {
      ++g.out_offsets_[u + 1];
      ++g.in_offsets_[v + 1];
    }
    std::partial_sum(g.out_offsets_.begin(), g.out_offsets_.end(), g.out_offsets_.begin());
    std::partial_sum(g.in_offsets_.begin(), g.in_offsets_.end(), g.in_offsets_.begin());
    g.out_adj_.resize(edges.size());
    g.in_adj_.resize(edges.size());
    // Edges are sorted by (u, v), so both fills produce sorted adjacency.
    std::vector<std::uint64_t> in_cursor(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto [u, v] = edges[e];
      g.out_adj_[e] = v;
      g.in_adj_[in_cursor[v]++] = u;
    }
    g.stats_ = stats;
    return g;
  }

  std::size_t node_count() const noexcept { return ids_.size(); }
  std::size_t edge_count() const noexcept { return out_adj_.size(); }

  std::span<const ArticleId> ids() const noexcept { return ids_; }
  ArticleId id(Index i) const { return ids_[i]; }

  std::optional<Index> index_of(ArticleId id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return std::nullopt;
    return static_cast<Index>(it - ids_.begin());
  }
  bool contains(ArticleId id) const { return index_of(id).has_value(); }

  /// References of node i (the articles it cites), ascending.
  std::span<const Index> cited_by(Index i) const {
    return {out_adj_.data() + out_offsets_[i], out_adj_.data() + out_offsets_[i + 1]};
  }
  /// Articles citing node i, ascending.
  std::span<const Index> citers_of(Index i) const {
    return {in_adj_.data() + in_offsets_[i], in_adj_.data() + in_offsets_[i + 1]};
  }
  std::size_t out_degree(Index i) const { return out_offsets_[i + 1] - out_offsets_[i]; }
  std::size_t in_degree(Index i) const { return in_offsets_[i + 1] - in_offsets_[i]; }

  bool has_edge(ArticleId citing, ArticleId cited) const {
    auto u = index_of(citing);
    auto v = index_of(cited);
    if (!u || !v) return false;
    auto refs = cited_by(*u);
    return std::binary_search(refs.begin(), refs.end(), *v);
  }

  /// The articles `id` cites (its references).
  std::vector<ArticleId> successors_of(ArticleId id) const { return to_ids(cited_by(require(id))); }
  /// The articles citing `id`.
  std::vector<ArticleId> predecessors_of(ArticleId id) const { return to_ids(citers_of(require(id))); }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (Index u = 0; u < node_count(); ++u)
      for (Index v : cited_by(u)) out.push_back({ids_[u], ids_[v]});
    return out;
  }

  /// Subgraph over nodes with keep[i] != 0 and the edges between them.
  CitationGraph induced(const std::vector<char>& keep) const {
    std::vector<Index> remap(node_count(), kNone);
    std::vector<ArticleId> ids;
    for (Index i = 0; i < node_count(); ++i)
      if (keep[i]) {
        remap[i] = static_cast<Index>(ids.size());
        ids.push_back(ids_[i]);
      }
    CitationGraph g;
    const std::size_t n = ids.size();
    g.ids_ = std::move(ids);
    g.out_offsets_.assign(n + 1, 0);
    g.in_offsets_.assign(n + 1, 0);
    for (Index u = 0; u < node_count(); ++u) {
      if (remap[u] == kNone) continue;
      for (Index v : cited_by(u))
        if (remap[v] != kNone) {
          g.out_adj_.push_back(remap[v]);
          ++g.in_offsets_[remap[v] + 1];
        }
      g.out_offsets_[remap[u] + 1] = g.out_adj_.size();
    }
    std::partial_sum(g.in_offsets_.begin(), g.in_offsets_.end(), g.in_offsets_.begin());
    g.in_adj_.resize(g.out_adj_.size());
    std::vector<std::uint64_t> cursor(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
    for (Index u = 0; u < n; ++u)
      for (Index v : g.cited_by(u)) g.in_adj_[cursor[v]++] = u;
    g.month_ = month_;
    g.sample_seed_ = sample_seed_;
    return g;
  }

  const GraphBuildStats& build_stats() const noexcept { return stats_; }
  std::optional<Month> month() const noexcept { return month_; }
  std::optional<std::uint64_t> sample_seed() const noexcept { return sample_seed_; }
  void set_month(Month m) { month_ = m; }
  void set_sample_seed(std::uint64_t s) { sample_seed_ = s; }

  /// Structural equality (nodes and edges); metadata is ignored.
  friend bool operator==(const CitationGraph& a, const CitationGraph& b) {
    return a.ids_ == b.ids_ && a.out_offsets_ == b.out_offsets_ && a.out_adj_ == b.out_adj_;
  }

  void write_cache(std::ostream& out) const;
  static CitationGraph read_cache(std::istream& in);

 private:
  static constexpr Index kNone = static_cast<Index>(-1);

  Index require(ArticleId id) const {
    auto i = index_of(id);
    if (!i) throw Error("article " + std::to_string(id) + " is not in the citation graph");
    return *i;
  }

  std::vector<ArticleId> to_ids(std::span<const Index> idx) const {
    std::vector<ArticleId> out;
    out.reserve(idx.size());
    for (Index i : idx) out.push_back(ids_[i]);
    return out;
  }

  std::vector<ArticleId> ids_;
  std::vector<std::uint64_t> out_offsets_;
  std::vector<Index> out_adj_;
  std::vector<std::uint64_t> in_offsets_;
  std::vector<Index> in_adj_;
  GraphBuildStats stats_;
  std::optional<Month> month_;
  std::optional<std::uint64_t> sample_seed_;
};

/// `citing_id \t cited_id` rows; `#` lines and blank lines are skipped.
inline std::vector<Edge> parse_citations(std::istream& in) {
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (is_blank_or_comment(line)) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2) throw ParseError(lineno, "expected 'citing_id<TAB>cited_id'");
    auto citing = parse_u64(fields[0]);
    auto cited = parse_u64(fields[1]);
    if (!citing || !cited) throw ParseError(lineno, "article ids must be unsigned integers");
    edges.push_back({*citing, *cited});
  }
  return edges;
}

inline void write_citations(std::ostream& out, std::span<const Edge> edges) {
  for (const auto& e : edges) out << e.citing << '\t' << e.cited << '\n';
}

/// Graph over every article in `store`. Edges touching ids outside the
/// store, self citations and duplicates are dropped and counted.
inline CitationGraph build_graph(std::span<const Edge> edges, const ArticleStore& store) {
  std::vector<ArticleId> ids;
  ids.reserve(store.size());
  for (const auto& a : store.articles()) ids.push_back(a.id);
  auto index = [&](ArticleId id) -> std::optional<CitationGraph::Index> {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) return std::nullopt;
    return static_cast<CitationGraph::Index>(it - ids.begin());
  };
  GraphBuildStats stats;
  std::vector<std::pair<CitationGraph::Index, CitationGraph::Index>> idx;
  idx.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.citing == e.cited) {
      ++stats.self_loops;
      continue;
    }
    auto u = index(e.citing);
    auto v = index(e.cited);
    if (!u || !v) {
      ++stats.unknown_endpoints;
      continue;
    }
    idx.emplace_back(*u, *v);
  }
  return CitationGraph::from_index_edges(std::move(ids), std::move(idx), stats);
}

/// Induced subgraph over articles published in or before `month`.
inline CitationGraph cumulative_snapshot(const CitationGraph& g, const ArticleStore& store,
                                         const Month& month) {
  std::vector<char> keep(g.node_count(), 0);
  for (CitationGraph::Index i = 0; i < g.node_count(); ++i) {
    const auto* a = store.find(g.id(i));
    keep[i] = a && a->month <= month;
  }
  auto out = g.induced(keep);
  out.set_month(month);
  return out;
}

/// Keeps floor(fraction * |nodes|) nodes: node indices in ascending-id order
/// are shuffled by Rng(seed) and the prefix is taken. Edges are induced.
inline CitationGraph sample_nodes(const CitationGraph& g, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw Error("sample fraction must lie in (0, 1], got " + format_g17(fraction));
  const auto n = g.node_count();
  const auto take = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  std::vector<CitationGraph::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span(order));
  std::vector<char> keep(n, 0);
  for (std::size_t i = 0; i < take; ++i) keep[order[i]] = 1;
  auto out = g.induced(keep);
  out.set_sample_seed(seed);
  return out;
}

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), 8);
}

inline std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 8)) throw Error("truncated graph cache");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline constexpr char kCacheMagic[8] = {'K', 'R', 'G', 'R', 'A', 'P', 'H', '\0'};
inline constexpr std::uint64_t kCacheVersion = 1;

}  // namespace detail

/// Cache layout (all integers little-endian u64): magic, version, n, m,
/// n ids, m (citing index, cited index) pairs in sorted order.
inline void CitationGraph::write_cache(std::ostream& out) const {
  out.write(detail::kCacheMagic, 8);
  detail::put_u64(out, detail::kCacheVersion);
  detail::put_u64(out, node_count());
  detail::put_u64(out, edge_count());
  for (auto id : ids_) detail::put_u64(out, id);
  for (Index u = 0; u < node_count(); ++u)
    for (Index v : cited_by(u)) {
      detail::put_u64(out, u);
      detail::put_u64(out, v);
    }
}

inline CitationGraph CitationGraph::read_cache(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || !std::equal(magic, magic + 8, detail::kCacheMagic))
    throw Error("not a citation graph cache");
  if (auto v = detail::get_u64(in); v != detail::kCacheVersion)
    throw Error("unsupported graph cache version " + std::to_string(v));
  const auto n = detail::get_u64(in);
  const auto m = detail::get_u64(in);
  std::vector<ArticleId> ids(n);
  for (auto& id : ids) id = detail::get_u64(in);
  if (!std::is_sorted(ids.begin(), ids.end())) throw Error("graph cache ids not sorted");
  std::vector<std::pair<Index, Index>> edges(m);
  for (auto& [u, v] : edges) {
    u = static_cast<Index>(detail::get_u64(in));
    v = static_cast<Index>(detail::get_u64(in));
    if (u >= n || v >= n) throw Error("graph cache edge out of range");
  }
  return from_index_edges(std::move(ids), std::move(edges));
}

}  // namespace kosrel
