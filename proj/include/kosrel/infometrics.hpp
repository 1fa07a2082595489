#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "kosrel/aspect.hpp"
#include "kosrel/error.hpp"
#include "kosrel/hierarchy.hpp"

namespace kosrel {

/// Per-article sets of directly mapped nodes, one entry per article.
using NodeSets = std::vector<std::vector<Hierarchy::Index>>;

/// Mapping event counts per hierarchy node, indexed by Hierarchy::Index.
struct MappingCounts {
  std::vector<std::uint64_t> direct;
  std::vector<std::uint64_t> propagated;
  /// level -> sum of propagated counts over that level's nodes (index 0 unused).
  std::vector<std::uint64_t> level_totals;
};

/// An article mapped to k distinct nodes contributes k direct counts; each
/// node's propagated count adds its children's propagated counts.
inline MappingCounts mapping_counts(const Hierarchy& h, const NodeSets& articles) {
  MappingCounts c;
  c.direct.assign(h.size(), 0);
  for (const auto& nodes : articles) {
    auto sorted = nodes;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (auto i : sorted) {
      if (i >= h.size()) throw Error("mapping references a node outside the hierarchy");
      ++c.direct[i];
    }
  }
  c.propagated = c.direct;
  for (int level = h.max_level(); level >= 2; --level)
    for (auto i : h.level_indices(level)) c.propagated[*h.parent(i)] += c.propagated[i];
  c.level_totals.assign(static_cast<std::size_t>(h.max_level()) + 1, 0);
  for (Hierarchy::Index i = 0; i < h.size(); ++i)
    c.level_totals[static_cast<std::size_t>(h.level(i))] += c.propagated[i];
  return c;
}

/// Convenience form over (article, tree code) pairs.
template <typename ArticleKey>
MappingCounts mapping_counts(const Hierarchy& h,
                             std::span<const std::pair<ArticleKey, TreeCode>> pairs) {
  std::vector<std::pair<ArticleKey, Hierarchy::Index>> resolved;
  resolved.reserve(pairs.size());
  for (const auto& [a, code] : pairs) resolved.emplace_back(a, h.require(code));
  std::sort(resolved.begin(), resolved.end());
  NodeSets sets;
  for (std::size_t i = 0; i < resolved.size(); ++i) {
    if (i == 0 || resolved[i].first != resolved[i - 1].first) sets.emplace_back();
    sets.back().push_back(resolved[i].second);
  }
  return mapping_counts(h, sets);
}

enum class InformativenessMode { entropy_term, surprisal };

inline std::string_view mode_name(InformativenessMode m) {
  return m == InformativenessMode::entropy_term ? "entropy-term" : "surprisal";
}

inline InformativenessMode parse_informativeness_mode(std::string_view s) {
  if (s == "entropy-term") return InformativenessMode::entropy_term;
  if (s == "surprisal") return InformativenessMode::surprisal;
  throw Error("unknown informativeness mode '" + std::string(s) + "'");
}

/// With p = propagated[n] / level_totals[level(n)]:
///   entropy-term: -p log2 p (0 when p = 0)
///   surprisal:    -log2 p   (node unscored when p = 0)
/// Nodes on levels without any mapping are unscored in both modes.
inline AspectScores informativeness(const Hierarchy& h, const MappingCounts& counts,
                                    InformativenessMode mode = InformativenessMode::entropy_term,
                                    Month month = {}) {
  AspectScores out{Aspect::informativeness, month, {}};
  for (Hierarchy::Index i = 0; i < h.size(); ++i) {
    const auto total = counts.level_totals[static_cast<std::size_t>(h.level(i))];
    if (total == 0) continue;
    const double p = static_cast<double>(counts.propagated[i]) / static_cast<double>(total);
    if (mode == InformativenessMode::entropy_term) {
      out.values.emplace_hint(out.values.end(), h.code(i), p > 0 ? -p * std::log2(p) : 0.0);
    } else if (p > 0) {
      out.values.emplace_hint(out.values.end(), h.code(i), -std::log2(p));
    }
  }
  return out;
}

/// Binary node x article incidence with upward propagation: an article marks
/// a node when it maps to the node or to any of its descendants.
struct MappingMatrix {
  /// rows[node] = ascending article columns.
  std::vector<std::vector<std::uint32_t>> rows;
  std::size_t n_nodes = 0;
  std::size_t m_articles = 0;

  std::uint64_t total_mass() const {
    std::uint64_t t = 0;
    for (const auto& r : rows) t += r.size();
    return t;
  }
};

inline MappingMatrix mapping_matrix(const Hierarchy& h, const NodeSets& articles) {
  MappingMatrix m;
  m.n_nodes = h.size();
  m.m_articles = articles.size();
  m.rows.assign(h.size(), {});
  std::vector<std::uint32_t> stamp(h.size(), 0);
  for (std::size_t j = 0; j < articles.size(); ++j) {
    const auto mark = static_cast<std::uint32_t>(j + 1);
    for (auto node : articles[j]) {
      std::optional<Hierarchy::Index> cur = node;
      while (cur && stamp[*cur] != mark) {
        stamp[*cur] = mark;
        m.rows[*cur].push_back(static_cast<std::uint32_t>(j));
        cur = h.parent(*cur);
      }
    }
  }
  return m;
}

/// Category utility per node over the propagated matrix M:
///   p(c) = rowsum(c) / sum(M), p(f_k) = colsum(k) / n_nodes, p(f_k|c) = M[c][k],
///   CU(c) = p(c) * sum_{k: colsum(k) > 0} (M[c][k] - p(f_k)^2).
/// Since M is binary the inner sum is rowsum(c) - S with S = sum_k p(f_k)^2.
/// Returns one value per row; empty when the matrix has no mass.
inline std::vector<double> category_utility(const MappingMatrix& m) {
  const auto total = m.total_mass();
  if (m.n_nodes == 0 || m.m_articles == 0 || total == 0) return {};
  std::vector<std::uint64_t> colsum(m.m_articles, 0);
  for (const auto& row : m.rows)
    for (auto k : row) ++colsum[k];
  const double n = static_cast<double>(m.n_nodes);
  double s = 0.0;
  for (auto cs : colsum) {
    const double p = static_cast<double>(cs) / n;
    s += p * p;
  }
  std::vector<double> cu(m.rows.size());
  for (std::size_t c = 0; c < m.rows.size(); ++c) {
    const double rowsum = static_cast<double>(m.rows[c].size());
    cu[c] = rowsum == 0 ? 0.0 : rowsum / static_cast<double>(total) * (rowsum - s);
  }
  return cu;
}

inline AspectScores usefulness(const Hierarchy& h, const MappingMatrix& m, Month month = {}) {
  AspectScores out{Aspect::usefulness, month, {}};
  const auto cu = category_utility(m);
  for (std::size_t c = 0; c < cu.size(); ++c)
    out.values.emplace_hint(out.values.end(), h.code(static_cast<Hierarchy::Index>(c)), cu[c]);
  return out;
}

}  // namespace kosrel
