#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <string>
#include <vector>

#include "kosrel/citegraph.hpp"
#include "kosrel/corpus.hpp"
#include "kosrel/error.hpp"
#include "kosrel/evaluate.hpp"
#include "kosrel/hierarchy.hpp"
#include "kosrel/month.hpp"
#include "kosrel/rng.hpp"

namespace kosrel {

struct ScenarioConfig {
  std::uint64_t seed = 1;
  Month first_month{2014, 1};
  int months = 24;
  int articles_per_month = 5000;
  /// branching[0] = number of categories (<= 16), branching[l] = children
  /// per node at depth l.
  std::vector<int> branching = {16, 8, 6, 5};
  /// Share of descriptors mapped to a second tree node.
  double multi_mapping_fraction = 0.05;
  double descriptors_per_article = 10.0;
  /// Descriptor popularity ~ 1 / rank^zipf_exponent over a random order.
  double zipf_exponent = 0.6;
  double references_mean = 8.0;
  int min_references = 0;
  /// Citation target weight = (1 + in-degree)^attachment_exponent.
  double attachment_exponent = 1.0;
  /// Share of descriptors changed in each first-half ("AA") release.
  double evolving_fraction = 0.01;
  /// Usage multiplier of changed descriptors, applied from
  /// boost_lead_months before their release until the release ends.
  double usage_boost = 2.5;
  int boost_lead_months = 12;
  double retraction_rate = 0.005;
  /// Retracted articles draw descriptors with popularity^retraction_tilt.
  double retraction_tilt = 1.5;
  std::uint64_t first_article_id = 1;

  void validate() const {
    auto rate = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) throw Error(std::string(name) + " must lie in [0, 1]");
    };
    rate(multi_mapping_fraction, "multi_mapping_fraction");
    rate(evolving_fraction, "evolving_fraction");
    rate(retraction_rate, "retraction_rate");
    if (months < 1) throw Error("months must be >= 1");
    if (articles_per_month < 1) throw Error("articles_per_month must be >= 1");
    if (branching.empty() || branching[0] < 1 || branching[0] > 16)
      throw Error("branching[0] (categories) must lie in [1, 16]");
    for (std::size_t l = 1; l < branching.size(); ++l) {
      if (branching[l] < 1) throw Error("branching factors must be >= 1");
      if (branching[l] > (l == 1 ? 99 : 999)) throw Error("branching factor exceeds tree-code width");
    }
    if (branching.size() < 2) throw Error("the hierarchy needs at least two levels");
    if (descriptors_per_article < 1.0) throw Error("descriptors_per_article must be >= 1");
    if (references_mean < 0.0 || min_references < 0) throw Error("reference counts must be >= 0");
    if (min_references > references_mean) throw Error("min_references exceeds references_mean");
    if (months > 1 && min_references > articles_per_month)
      throw Error("min_references exceeds the number of articles available to cite");
    if (usage_boost <= 0.0) throw Error("usage_boost must be positive");
    if (boost_lead_months < 0) throw Error("boost_lead_months must be >= 0");
  }
};

struct Scenario {
  Hierarchy hierarchy;
  ArticleStore articles;
  std::vector<Edge> citations;
  std::vector<ChangeRecord> changes;
};

/// Release covering `m`: January-June -> "YYYYAA", July-December -> "YYYYAB".
inline std::string release_of(const Month& m) {
  return std::to_string(m.year()) + (m.month() <= 6 ? "AA" : "AB");
}

namespace detail {

/// Fenwick tree over non-negative weights with prefix search.
class WeightTree {
 public:
  explicit WeightTree(std::size_t n = 0) : tree_(n + 1, 0.0) {}

  void grow_to(std::size_t n) {
    // Rebuild is fine: growth happens once per month.
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < size(); ++i) w[i] = weight(i);
    tree_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) add(i, w[i]);
  }

  std::size_t size() const noexcept { return tree_.size() - 1; }

  void add(std::size_t i, double delta) {
    for (auto k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
  }

  double prefix(std::size_t count) const {
    double s = 0.0;
    for (auto k = count; k > 0; k -= k & (~k + 1)) s += tree_[k];
    return s;
  }

  double weight(std::size_t i) const { return prefix(i + 1) - prefix(i); }
  double total() const { return prefix(size()); }

  /// Smallest index whose inclusive prefix exceeds `target`.
  std::size_t find(double target) const {
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 < tree_.size()) step *= 2;
    for (; step > 0; step /= 2)
      if (pos + step < tree_.size() && tree_[pos + step] <= target) {
        pos += step;
        target -= tree_[pos];
      }
    return std::min(pos, size() - 1);
  }

 private:
  std::vector<double> tree_;
};

/// Cumulative-weight sampler over a fixed weight vector.
class StaticSampler {
 public:
  explicit StaticSampler(const std::vector<double>& w) : cum_(w.size()) {
    std::partial_sum(w.begin(), w.end(), cum_.begin());
  }
  std::size_t draw(Rng& rng) const {
    const double t = rng.uniform() * cum_.back();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), t);
    return std::min(static_cast<std::size_t>(it - cum_.begin()), cum_.size() - 1);
  }

 private:
  std::vector<double> cum_;
};

inline constexpr char kCategoryLetters[] = "ABCDEFGHIJKLMNVZ";

inline std::string child_code(const std::string& parent, int depth, int ordinal) {
  char buf[16];
  if (depth == 1) {
    std::snprintf(buf, sizeof buf, "%02d", ordinal);
    return parent + buf;
  }
  std::snprintf(buf, sizeof buf, ".%03d", ordinal);
  return parent + buf;
}

}  // namespace detail

/// Fully deterministic given cfg.seed. Articles cite only articles from
/// earlier months.
inline Scenario generate(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  Scenario sc;

  // Hierarchy: one descriptor per node below the category level.
  Hierarchy::Builder hb;
  std::vector<std::string> frontier;
  for (int c = 0; c < cfg.branching[0]; ++c) frontier.emplace_back(1, detail::kCategoryLetters[c]);
  for (const auto& code : frontier) hb.add_node(TreeCode::parse(code), "Category " + code);
  std::vector<std::string> descriptor_home;
  for (std::size_t depth = 1; depth < cfg.branching.size(); ++depth) {
    std::vector<std::string> next;
    for (const auto& p : frontier)
      for (int k = 1; k <= cfg.branching[depth]; ++k) next.push_back(detail::child_code(p, static_cast<int>(depth), k));
    for (const auto& code : next) hb.add_node(TreeCode::parse(code), "Concept " + code);
    descriptor_home.insert(descriptor_home.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::sort(descriptor_home.begin(), descriptor_home.end());
  const std::size_t n_desc = descriptor_home.size();
  std::vector<DescriptorId> descriptors(n_desc);
  for (std::size_t d = 0; d < n_desc; ++d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "D%06zu", d + 1);
    descriptors[d] = buf;
    hb.add_mapping(TreeCode::parse(descriptor_home[d]), descriptors[d]);
    if (rng.bernoulli(cfg.multi_mapping_fraction)) {
      const auto other = rng.below(n_desc);
      hb.add_mapping(TreeCode::parse(descriptor_home[other]), descriptors[d]);
    }
  }
  sc.hierarchy = hb.build();

  // Descriptor popularity.
  std::vector<std::size_t> order(n_desc);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span(order));
  std::vector<double> popularity(n_desc);
  for (std::size_t r = 0; r < n_desc; ++r)
    popularity[order[r]] = 1.0 / std::pow(static_cast<double>(r + 1), cfg.zipf_exponent);

  // Planted changes: each first-half release touched by the window.
  std::map<std::string, std::set<std::size_t>> evolving;
  const auto n_evolving = static_cast<std::size_t>(std::llround(cfg.evolving_fraction * static_cast<double>(n_desc)));
  for (int t = 0; t < cfg.months; ++t) {
    const Month m = cfg.first_month + t;
    const auto rel = release_of(m);
    if (m.month() > 6 || evolving.count(rel)) continue;
    auto& set = evolving[rel];
    std::vector<std::size_t> pool(n_desc);
    std::iota(pool.begin(), pool.end(), 0);
    rng.shuffle(std::span(pool));
    set.insert(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(std::min(n_evolving, n_desc)));
    for (auto d : set) {
      const auto type = static_cast<ChangeType>(rng.below(4));
      sc.changes.push_back({rel, descriptors[d], type});
    }
  }
  std::sort(sc.changes.begin(), sc.changes.end(), [](const ChangeRecord& a, const ChangeRecord& b) {
    return std::tie(a.release, a.descriptor) < std::tie(b.release, b.descriptor);
  });

  std::vector<double> tilted(n_desc);
  for (std::size_t d = 0; d < n_desc; ++d) tilted[d] = std::pow(popularity[d], cfg.retraction_tilt);
  const detail::StaticSampler retracted_sampler(tilted);

  std::vector<Article> articles;
  articles.reserve(static_cast<std::size_t>(cfg.months) * static_cast<std::size_t>(cfg.articles_per_month));
  std::vector<std::uint64_t> in_degree;
  detail::WeightTree targets;
  auto attach_weight = [&](std::uint64_t deg) {
    return std::pow(1.0 + static_cast<double>(deg), cfg.attachment_exponent);
  };

  ArticleId next_id = cfg.first_article_id;
  for (int t = 0; t < cfg.months; ++t) {
    const Month m = cfg.first_month + t;
    std::vector<double> weights = popularity;
    for (const auto& [rel, set] : evolving) {
      const Month start(std::stoi(rel.substr(0, 4)), rel.ends_with("AA") ? 1 : 7);
      if (m < start + (-cfg.boost_lead_months) || start + 5 < m) continue;
      for (auto d : set) weights[d] *= cfg.usage_boost;
    }
    const detail::StaticSampler sampler(weights);

    const std::size_t prior = articles.size();
    std::vector<std::uint64_t> new_cites;
    for (int a = 0; a < cfg.articles_per_month; ++a) {
      Article art;
      art.id = next_id++;
      art.month = m;
      art.retracted = rng.bernoulli(cfg.retraction_rate);
      const auto& s = art.retracted ? retracted_sampler : sampler;
      const auto want = std::min<std::size_t>(1 + rng.poisson(cfg.descriptors_per_article - 1.0), n_desc);
      std::set<std::size_t> picked;
      for (std::size_t tries = 0; picked.size() < want && tries < 50 * want; ++tries) picked.insert(s.draw(rng));
      for (auto d : picked) art.descriptors.push_back(descriptors[d]);

      if (prior > 0) {
        auto refs = static_cast<std::size_t>(cfg.min_references) +
                    rng.poisson(cfg.references_mean - cfg.min_references);
        refs = std::min(refs, prior);
        std::set<std::size_t> cited;
        for (std::size_t tries = 0; cited.size() < refs && tries < 50 * refs + 50; ++tries)
          cited.insert(targets.find(rng.uniform() * targets.total()));
        // Heavy attachment can starve the draw; fill up deterministically.
        for (std::size_t c = 0; cited.size() < refs; ++c) cited.insert(c);
        for (auto c : cited) {
          sc.citations.push_back({art.id, articles[c].id});
          new_cites.push_back(c);
        }
      }
      articles.push_back(std::move(art));
    }
    in_degree.resize(articles.size(), 0);
    targets.grow_to(articles.size());
    for (std::size_t i = prior; i < articles.size(); ++i) targets.add(i, attach_weight(0));
    for (auto c : new_cites) {
      targets.add(c, attach_weight(in_degree[c] + 1) - attach_weight(in_degree[c]));
      ++in_degree[c];
    }
  }
  sc.articles = ArticleStore(std::move(articles));
  return sc;
}

}  // namespace kosrel
