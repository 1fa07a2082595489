#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kosrel/aspect.hpp"
#include "kosrel/error.hpp"
#include "kosrel/month.hpp"
#include "kosrel/tree_code.hpp"

namespace kosrel {

using Ranks = std::map<TreeCode, int>;

namespace detail {

/// Codes ordered by descending value, ascending code on ties.
inline std::vector<std::pair<TreeCode, double>> order_desc(const NodeValues& values) {
  std::vector<std::pair<TreeCode, double>> v(values.begin(), values.end());
  std::stable_sort(v.begin(), v.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return v;
}

}  // namespace detail

/// Ordinal ranks 1..N: largest value first, ties broken by ascending code.
inline Ranks rank_by_aspect(const NodeValues& values) {
  Ranks r;
  int pos = 0;
  for (const auto& [code, v] : detail::order_desc(values)) r.emplace(code, ++pos);
  return r;
}

inline NodeValues restrict_to_level(const NodeValues& values, int level) {
  NodeValues out;
  for (const auto& [code, v] : values)
    if (code.level() == level) out.emplace_hint(out.end(), code, v);
  return out;
}

/// `std::nullopt` level means the ranking spans every node.
struct RelevanceRanking {
  Month month;
  std::optional<int> level;
  NodeValues rrf;
  Ranks rank;

  std::string scope() const { return level ? "level-" + std::to_string(*level) : "global"; }

  /// Codes in rank order.
  std::vector<TreeCode> ordered() const {
    std::vector<TreeCode> out(rank.size());
    for (const auto& [code, r] : rank) out[static_cast<std::size_t>(r - 1)] = code;
    return out;
  }
};

inline RelevanceRanking ranking_from_values(NodeValues rrf, Month month,
                                            std::optional<int> level = std::nullopt) {
  RelevanceRanking out;
  out.month = month;
  out.level = level;
  out.rank = rank_by_aspect(rrf);
  out.rrf = std::move(rrf);
  return out;
}

/// Reciprocal rank fusion: rrf(d) = sum over rankings of 1 / (k + rank(d)).
/// A node missing from one ranking gets no term from it.
inline RelevanceRanking rrf_fuse(std::span<const Ranks> rankings, int k = 60, Month month = {}) {
  if (k <= 0) throw Error("rrf k must be positive");
  NodeValues rrf;
  for (const auto& ranks : rankings)
    for (const auto& [code, r] : ranks) rrf[code] += 1.0 / (static_cast<double>(k) + r);
  return ranking_from_values(std::move(rrf), month);
}

/// Re-ranks globally fused scores among the nodes of one level.
inline RelevanceRanking rerank_level(const RelevanceRanking& global, int level) {
  return ranking_from_values(restrict_to_level(global.rrf, level), global.month, level);
}

/// Mean of consecutive rank differences; negative means climbing.
inline double rank_trend_slope(std::span<const double> ranks) {
  if (ranks.size() < 2) throw Error("rank trend needs at least two points");
  double sum = 0.0;
  for (std::size_t t = 1; t < ranks.size(); ++t) sum += ranks[t] - ranks[t - 1];
  return sum / static_cast<double>(ranks.size() - 1);
}

inline std::vector<TreeCode> top_k(const RelevanceRanking& r, std::size_t k) {
  if (k == 0) throw Error("k must be at least 1");
  auto all = r.ordered();
  all.resize(std::min(k, all.size()));
  return all;
}

inline std::vector<TreeCode> bottom_k(const RelevanceRanking& r, std::size_t k) {
  if (k == 0) throw Error("k must be at least 1");
  auto all = r.ordered();
  std::reverse(all.begin(), all.end());
  all.resize(std::min(k, all.size()));
  return all;
}

/// Mean rank per code over several rankings (e.g. the months of a year).
/// Codes absent from some rankings are averaged over the ones they appear in.
inline std::map<TreeCode, double> average_ranks(std::span<const RelevanceRanking> rankings) {
  std::map<TreeCode, std::pair<double, int>> acc;
  for (const auto& r : rankings)
    for (const auto& [code, rank] : r.rank) {
      auto& [sum, n] = acc[code];
      sum += rank;
      ++n;
    }
  std::map<TreeCode, double> out;
  for (const auto& [code, sn] : acc) out.emplace_hint(out.end(), code, sn.first / sn.second);
  return out;
}

/// Codes by ascending average rank (best first); ties by code.
inline std::vector<std::pair<TreeCode, double>> top_k_by_average(
    const std::map<TreeCode, double>& avg, std::size_t k) {
  if (k == 0) throw Error("k must be at least 1");
  std::vector<std::pair<TreeCode, double>> v(avg.begin(), avg.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  v.resize(std::min(k, v.size()));
  return v;
}

/// Codes by descending average rank (worst first); ties by code.
inline std::vector<std::pair<TreeCode, double>> bottom_k_by_average(
    const std::map<TreeCode, double>& avg, std::size_t k) {
  if (k == 0) throw Error("k must be at least 1");
  std::vector<std::pair<TreeCode, double>> v(avg.begin(), avg.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  v.resize(std::min(k, v.size()));
  return v;
}

}  // namespace kosrel
