#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "kosrel/article_nodes.hpp"
#include "kosrel/aspect.hpp"
#include "kosrel/corpus.hpp"
#include "kosrel/error.hpp"
#include "kosrel/hierarchy.hpp"
#include "kosrel/text.hpp"

namespace kosrel {

enum class ChangeType { description, extension, move, removal };

inline std::string_view change_type_name(ChangeType t) {
  switch (t) {
    case ChangeType::description: return "description";
    case ChangeType::extension: return "extension";
    case ChangeType::move: return "move";
    case ChangeType::removal: return "removal";
  }
  return "?";
}

inline ChangeType parse_change_type(std::string_view s) {
  for (auto t : {ChangeType::description, ChangeType::extension, ChangeType::move, ChangeType::removal})
    if (change_type_name(t) == s) return t;
  throw Error("unknown change type '" + std::string(s) + "'");
}

struct ChangeRecord {
  std::string release;  // e.g. "2014AA"
  DescriptorId descriptor;
  ChangeType change_type = ChangeType::description;

  friend bool operator==(const ChangeRecord&, const ChangeRecord&) = default;
};

/// `release \t descriptor_id \t change_type`; `#` and blank lines skipped.
inline std::vector<ChangeRecord> parse_changes(std::istream& in) {
  std::vector<ChangeRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (is_blank_or_comment(line)) continue;
    auto f = split(line, '\t');
    if (f.size() != 3) throw ParseError(lineno, "expected 'release<TAB>descriptor<TAB>change_type'");
    try {
      out.push_back({std::string(trim(f[0])), std::string(trim(f[1])), parse_change_type(trim(f[2]))});
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

inline void write_changes(std::ostream& out, std::span<const ChangeRecord> changes) {
  for (const auto& c : changes)
    out << c.release << '\t' << c.descriptor << '\t' << change_type_name(c.change_type) << '\n';
}

// ---------------------------------------------------------------------------
// Mann-Whitney U

enum class TestMethod { exact, normal_approx };

inline std::string_view method_name(TestMethod m) {
  return m == TestMethod::exact ? "exact" : "normal-approx";
}

struct TestResult {
  double u_statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  TestMethod method = TestMethod::exact;
};

inline constexpr std::size_t kExactThreshold = 10;

/// Average ranks (1-based) with ties sharing their mean rank.
inline std::vector<double> tie_averaged_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace detail {

/// counts[u] = number of group arrangements of sizes (n1, n2) with U1 = u.
inline std::vector<double> u_distribution(std::size_t n1, std::size_t n2) {
  // table[a][b] is the distribution for sizes (a, b); built up by the
  // recurrence N(u; a, b) = N(u - b; a - 1, b) + N(u; a, b - 1).
  std::vector<std::vector<std::vector<double>>> table(n1 + 1, std::vector<std::vector<double>>(n2 + 1));
  for (std::size_t a = 0; a <= n1; ++a)
    for (std::size_t b = 0; b <= n2; ++b) {
      auto& dist = table[a][b];
      dist.assign(a * b + 1, 0.0);
      if (a == 0 || b == 0) {
        dist[0] = 1.0;
        continue;
      }
      const auto& left = table[a - 1][b];
      const auto& down = table[a][b - 1];
      for (std::size_t u = 0; u < left.size(); ++u) dist[u + b] += left[u];
      for (std::size_t u = 0; u < down.size(); ++u) dist[u] += down[u];
    }
  return table[n1][n2];
}

}  // namespace detail

/// Two-sided Mann-Whitney U test, U = min(U1, U2). Exact when both groups
/// have at most 10 values and there are no ties; otherwise the normal
/// approximation with tie correction and a 0.5 continuity correction.
inline TestResult mann_whitney(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error("mann_whitney needs two non-empty samples");
  const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = tie_averaged_ranks(pooled);
  const double r1 = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);
  const double u1 = r1 - static_cast<double>(n1) * static_cast<double>(n1 + 1) / 2.0;
  const double u2 = static_cast<double>(n1) * static_cast<double>(n2) - u1;
  const double u = std::min(u1, u2);

  double tie_term = 0.0;  // sum of t^3 - t over tie groups
  {
    auto sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tie_term += t * t * t - t;
      i = j + 1;
    }
  }

  TestResult r{u, 1.0, n1, n2, TestMethod::exact};
  if (std::max(n1, n2) <= kExactThreshold && tie_term == 0.0) {
    const auto dist = detail::u_distribution(n1, n2);
    const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
    double tail = 0.0;
    for (std::size_t k = 0; k <= static_cast<std::size_t>(u); ++k) tail += dist[k];
    r.p_value = std::min(1.0, 2.0 * tail / total);
    return r;
  }

  r.method = TestMethod::normal_approx;
  const double dn = static_cast<double>(n);
  const double mean = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;
  const double var = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                     ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (!(var > 0.0)) return r;
  const double z = std::max(0.0, std::abs(u - mean) - 0.5) / std::sqrt(var);
  r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

// ---------------------------------------------------------------------------
// Correlation

enum class CorrelationKind { pearson, spearman };

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("correlation needs paired samples");
  if (x.size() < 3) throw Error("correlation needs at least 3 pairs");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;  // a constant column correlates with nothing
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = tie_averaged_ranks(x);
  const auto ry = tie_averaged_ranks(y);
  return pearson(rx, ry);
}

inline double correlation(std::span<const double> x, std::span<const double> y, CorrelationKind kind) {
  return kind == CorrelationKind::pearson ? pearson(x, y) : spearman(x, y);
}

/// Symmetric matrix with unit diagonal over aligned columns.
inline std::vector<std::vector<double>> correlation_matrix(
    const std::vector<std::vector<double>>& columns, CorrelationKind kind) {
  const auto k = columns.size();
  for (const auto& c : columns)
    if (c.size() < 3) throw Error("correlation needs at least 3 pairs");
  std::vector<std::vector<double>> m(k, std::vector<double>(k, 1.0));
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) m[a][b] = m[b][a] = correlation(columns[a], columns[b], kind);
  return m;
}

// ---------------------------------------------------------------------------
// Cohorts

/// Descriptor-level score: sum over the descriptor's tree nodes of the node
/// score. Descriptors with no scored node are omitted.
inline std::map<DescriptorId, double> descriptor_scores(const NodeValues& node_scores, const Hierarchy& h) {
  std::map<DescriptorId, double> out;
  for (const auto& [d, nodes] : h.descriptor_map()) {
    double sum = 0.0;
    bool any = false;
    for (auto i : nodes)
      if (auto it = node_scores.find(h.code(i)); it != node_scores.end()) {
        sum += it->second;
        any = true;
      }
    if (any) out.emplace_hint(out.end(), d, sum);
  }
  return out;
}

struct Cohorts {
  std::vector<double> test;     // evolving / retracted
  std::vector<double> control;  // stable / other
  /// True when the test cohort is empty and no comparison is possible.
  bool skipped = false;
};

/// Splits descriptor scores by membership in one release's change set.
inline Cohorts evolution_cohorts(const std::map<DescriptorId, double>& scores,
                                 std::span<const ChangeRecord> changes) {
  std::set<DescriptorId> changed;
  for (const auto& c : changes) changed.insert(c.descriptor);
  Cohorts out;
  for (const auto& [d, v] : scores) (changed.count(d) ? out.test : out.control).push_back(v);
  out.skipped = out.test.empty();
  return out;
}

inline Cohorts evolution_cohorts(const NodeValues& node_scores, std::span<const ChangeRecord> changes,
                                 const Hierarchy& h) {
  return evolution_cohorts(descriptor_scores(node_scores, h), changes);
}

/// One month's node scores together with the articles present in that
/// month's (sampled) network.
struct MonthlyPresence {
  Month month;
  const NodeValues* node_scores = nullptr;
  std::span<const ArticleId> present;
};

/// Per article and month present: value = sum of the node scores of the
/// article's tree nodes. Values are averaged per article over the months of
/// `year`, then split by the retraction flag.
inline Cohorts retraction_cohorts(const ArticleStore& store, const ArticleNodeIndex& mapping,
                                  const Hierarchy& h, std::span<const MonthlyPresence> months,
                                  int year) {
  std::map<ArticleId, std::pair<double, int>> acc;
  for (const auto& m : months) {
    if (m.month.year() != year || !m.node_scores) continue;
    std::vector<double> by_index(h.size(), 0.0);
    for (const auto& [code, v] : *m.node_scores)
      if (auto i = h.index_of(code)) by_index[*i] = v;
    for (auto id : m.present) {
      double v = 0.0;
      for (auto node : mapping.nodes_of(id)) v += by_index[node];
      auto& [sum, n] = acc[id];
      sum += v;
      ++n;
    }
  }
  Cohorts out;
  for (const auto& [id, sn] : acc) {
    const auto* a = store.find(id);
    const double mean = sn.first / sn.second;
    (a && a->retracted ? out.test : out.control).push_back(mean);
  }
  out.skipped = out.test.empty() || out.control.empty();
  return out;
}

}  // namespace kosrel
