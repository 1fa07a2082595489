#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kosrel/error.hpp"
#include "kosrel/hierarchy.hpp"
#include "kosrel/month.hpp"
#include "kosrel/text.hpp"

namespace kosrel {

using ArticleId = std::uint64_t;

struct Article {
  ArticleId id = 0;
  Month month;
  std::vector<DescriptorId> descriptors;  // ascending, unique
  bool retracted = false;

  friend bool operator==(const Article&, const Article&) = default;
};

/// Articles sorted by id with a month index.
class ArticleStore {
 public:
  ArticleStore() = default;

  /// Throws on duplicate ids.
  explicit ArticleStore(std::vector<Article> articles) : articles_(std::move(articles)) {
    for (auto& a : articles_) {
      std::sort(a.descriptors.begin(), a.descriptors.end());
      a.descriptors.erase(std::unique(a.descriptors.begin(), a.descriptors.end()),
                          a.descriptors.end());
    }
    std::sort(articles_.begin(), articles_.end(),
              [](const Article& a, const Article& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < articles_.size(); ++i)
      if (articles_[i].id == articles_[i - 1].id)
        throw Error("duplicate article id " + std::to_string(articles_[i].id));
    for (const auto& a : articles_) by_month_[a.month].push_back(a.id);
  }

  std::size_t size() const noexcept { return articles_.size(); }
  bool empty() const noexcept { return articles_.empty(); }
  const std::vector<Article>& articles() const noexcept { return articles_; }

  const Article* find(ArticleId id) const {
    auto it = std::lower_bound(articles_.begin(), articles_.end(), id,
                               [](const Article& a, ArticleId v) { return a.id < v; });
    return it != articles_.end() && it->id == id ? &*it : nullptr;
  }

  const Article& at(ArticleId id) const {
    const auto* a = find(id);
    if (!a) throw Error("unknown article id " + std::to_string(id));
    return *a;
  }

  /// Ids published in `month`, ascending.
  std::vector<ArticleId> articles_in_month(const Month& month) const {
    auto it = by_month_.find(month);
    return it == by_month_.end() ? std::vector<ArticleId>{} : it->second;
  }

  /// Ids published in or before `month`, ascending.
  std::vector<ArticleId> articles_up_to(const Month& month) const {
    std::vector<ArticleId> out;
    for (const auto& a : articles_)
      if (a.month <= month) out.push_back(a.id);
    return out;
  }

  std::vector<ArticleId> retracted_ids() const {
    std::vector<ArticleId> out;
    for (const auto& a : articles_)
      if (a.retracted) out.push_back(a.id);
    return out;
  }

  const std::map<Month, std::vector<ArticleId>>& by_month() const noexcept { return by_month_; }

  friend bool operator==(const ArticleStore& a, const ArticleStore& b) {
    return a.articles_ == b.articles_;
  }

 private:
  std::vector<Article> articles_;
  std::map<Month, std::vector<ArticleId>> by_month_;
};

inline Article article_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("expected a JSON object");
  if (!j.contains("id")) throw Error("missing field 'id'");
  if (!j.contains("month")) throw Error("missing field 'month'");
  const auto& id = j.at("id");
  if (!id.is_number_unsigned() && !(id.is_number_integer() && id.get<std::int64_t>() >= 0))
    throw Error("'id' must be a non-negative integer");
  if (!j.at("month").is_string()) throw Error("'month' must be a string");
  Article a;
  a.id = id.get<ArticleId>();
  a.month = Month::parse(j.at("month").get<std::string>());
  if (auto it = j.find("mesh"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw Error("'mesh' must be an array of strings");
    for (const auto& d : *it) {
      if (!d.is_string()) throw Error("'mesh' must be an array of strings");
      a.descriptors.push_back(d.get<std::string>());
    }
  }
  if (auto it = j.find("retracted"); it != j.end() && !it->is_null()) {
    if (!it->is_boolean()) throw Error("'retracted' must be a boolean");
    a.retracted = it->get<bool>();
  }
  return a;
}

inline nlohmann::json article_to_json(const Article& a) {
  return {{"id", a.id}, {"month", a.month.str()}, {"mesh", a.descriptors}, {"retracted", a.retracted}};
}

/// JSON-lines reader. Blank lines are skipped.
inline ArticleStore parse_articles(std::istream& in) {
  std::vector<Article> articles;
  std::set<ArticleId> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    Article a;
    try {
      a = article_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
    if (!seen.insert(a.id).second)
      throw ParseError(lineno, "duplicate article id " + std::to_string(a.id));
    articles.push_back(std::move(a));
  }
  return ArticleStore(std::move(articles));
}

inline void write_articles(std::ostream& out, const ArticleStore& store) {
  for (const auto& a : store.articles()) out << article_to_json(a).dump() << '\n';
}

}  // namespace kosrel
