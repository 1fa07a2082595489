#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kosrel/error.hpp"
#include "kosrel/text.hpp"
#include "kosrel/tree_code.hpp"

namespace kosrel {

using DescriptorId = std::string;

/// Immutable concept tree (a forest of category letters) plus the
/// descriptor -> tree node mapping. Nodes are stored in ascending code order
/// and addressed either by code or by dense index.
class Hierarchy {
 public:
  using Index = std::uint32_t;

  Hierarchy() = default;

  std::size_t size() const noexcept { return codes_.size(); }
  bool empty() const noexcept { return codes_.empty(); }

  const std::vector<TreeCode>& nodes() const noexcept { return codes_; }
  const TreeCode& code(Index i) const { return codes_.at(i); }

  std::optional<Index> index_of(const TreeCode& code) const {
    auto it = std::lower_bound(codes_.begin(), codes_.end(), code);
    if (it == codes_.end() || *it != code) return std::nullopt;
    return static_cast<Index>(it - codes_.begin());
  }
  bool contains(const TreeCode& code) const { return index_of(code).has_value(); }

  Index require(const TreeCode& code) const {
    auto i = index_of(code);
    if (!i) throw Error("tree code '" + code.str() + "' is not in the hierarchy");
    return *i;
  }

  int level(Index i) const { return levels_.at(i); }
  std::optional<Index> parent(Index i) const {
    auto p = parents_.at(i);
    return p == kNone ? std::nullopt : std::optional<Index>(p);
  }
  std::span<const Index> children(Index i) const { return children_.at(i); }
  bool is_leaf(Index i) const { return children_.at(i).empty(); }

  std::vector<TreeCode> children(const TreeCode& code) const {
    std::vector<TreeCode> out;
    for (Index c : children(require(code))) out.push_back(codes_[c]);
    return out;
  }

  const std::string& label(Index i) const { return labels_.at(i); }
  const std::string& label(const TreeCode& code) const { return labels_.at(require(code)); }

  int max_level() const noexcept { return max_level_; }

  std::vector<Index> roots() const {
    std::vector<Index> out;
    for (Index i = 0; i < size(); ++i)
      if (parents_[i] == kNone) out.push_back(i);
    return out;
  }

  /// Indices of every node at `level`, ascending by code. Empty when none.
  std::span<const Index> level_indices(int level) const {
    if (level < 1 || level > max_level_) return {};
    return by_level_[static_cast<std::size_t>(level)];
  }

  std::vector<TreeCode> nodes_at_level(int level) const {
    std::vector<TreeCode> out;
    for (Index i : level_indices(level)) out.push_back(codes_[i]);
    return out;
  }

  /// descriptor -> tree node indices (ascending). Keys ascending.
  const std::map<DescriptorId, std::vector<Index>>& descriptor_map() const noexcept {
    return descriptors_;
  }

  const std::vector<Index>* descriptor_nodes(const DescriptorId& id) const {
    auto it = descriptors_.find(id);
    return it == descriptors_.end() ? nullptr : &it->second;
  }

  std::vector<TreeCode> descriptor_codes(const DescriptorId& id) const {
    std::vector<TreeCode> out;
    if (auto* nodes = descriptor_nodes(id))
      for (Index i : *nodes) out.push_back(codes_[i]);
    return out;
  }

  friend bool operator==(const Hierarchy&, const Hierarchy&) = default;

  /// Collects rows, then materializes ancestors and freezes the tree.
  class Builder {
   public:
    /// Registers `code` with an optional label (empty = unlabelled).
    void add_node(const TreeCode& code, std::string_view label) {
      auto& slot = labels_[code];
      if (!label.empty()) {
        if (!slot.empty() && slot != label)
          throw Error("conflicting labels for tree code '" + code.str() + "'");
        slot = std::string(label);
        labelled_.insert(code);
      }
    }

    /// Returns false when the (code, descriptor) pair was already present.
    bool add_mapping(const TreeCode& code, const DescriptorId& descriptor) {
      labels_.try_emplace(code);
      return mappings_[descriptor].insert(code).second;
    }

    std::size_t unlabelled_mapped_codes() const {
      std::set<TreeCode> mapped;
      for (const auto& [d, codes] : mappings_) mapped.insert(codes.begin(), codes.end());
      std::size_t n = 0;
      for (const auto& c : mapped)
        if (!labelled_.count(c)) ++n;
      return n;
    }

    Hierarchy build() const {
      std::set<TreeCode> all;
      for (const auto& [code, label] : labels_) {
        std::optional<TreeCode> cur = code;
        while (cur) {
          if (!all.insert(*cur).second) break;
          cur = cur->parent();
        }
      }
      Hierarchy h;
      h.codes_.assign(all.begin(), all.end());
      const auto n = h.codes_.size();
      h.labels_.resize(n);
      h.levels_.resize(n);
      h.parents_.assign(n, kNone);
      h.children_.assign(n, {});
      for (Index i = 0; i < n; ++i) {
        const auto& code = h.codes_[i];
        if (auto it = labels_.find(code); it != labels_.end()) h.labels_[i] = it->second;
        h.levels_[i] = code.level();
        h.max_level_ = std::max(h.max_level_, h.levels_[i]);
        if (auto p = code.parent()) {
          Index pi = *h.index_of(*p);
          h.parents_[i] = pi;
          h.children_[pi].push_back(i);  // ascending because i ascends
        }
      }
      h.by_level_.assign(static_cast<std::size_t>(h.max_level_) + 1, {});
      for (Index i = 0; i < n; ++i) h.by_level_[static_cast<std::size_t>(h.levels_[i])].push_back(i);
      for (const auto& [d, codes] : mappings_) {
        auto& v = h.descriptors_[d];
        for (const auto& c : codes) v.push_back(*h.index_of(c));
      }
      return h;
    }

   private:
    std::map<TreeCode, std::string> labels_;
    std::set<TreeCode> labelled_;
    std::map<DescriptorId, std::set<TreeCode>> mappings_;
  };

 private:
  static constexpr Index kNone = static_cast<Index>(-1);

  std::vector<TreeCode> codes_;
  std::vector<std::string> labels_;
  std::vector<int> levels_;
  std::vector<Index> parents_;
  std::vector<std::vector<Index>> children_;
  std::vector<std::vector<Index>> by_level_;
  std::map<DescriptorId, std::vector<Index>> descriptors_;
  int max_level_ = 0;
};

struct HierarchyParseResult {
  Hierarchy hierarchy;
  /// Codes that carry descriptors but were never given a label row.
  std::size_t auto_created = 0;
};

/// Reads `tree_code \t descriptor_id \t label` rows. The descriptor and label
/// columns may be empty; `#` lines and blank lines are skipped.
inline HierarchyParseResult parse_hierarchy(std::istream& in) {
  Hierarchy::Builder builder;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (is_blank_or_comment(line)) continue;
    auto fields = split(line, '\t');
    if (fields.size() > 3) throw ParseError(lineno, "expected at most 3 tab-separated columns");
    auto code_text = trim(fields[0]);
    auto code = TreeCode::try_parse(code_text);
    if (!code) throw ParseError(lineno, "malformed tree code '" + std::string(code_text) + "'");
    std::string_view descriptor = fields.size() > 1 ? trim(fields[1]) : std::string_view{};
    std::string_view label = fields.size() > 2 ? trim(fields[2]) : std::string_view{};
    try {
      builder.add_node(*code, label);
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
    if (!descriptor.empty() &&
        !builder.add_mapping(*code, DescriptorId(descriptor)))
      throw ParseError(lineno, "duplicate row for (" + code->str() + ", " +
                                   std::string(descriptor) + ")");
  }
  return {builder.build(), builder.unlabelled_mapped_codes()};
}

/// Writes one row per (code, descriptor) pair, or a descriptor-less row for
/// nodes without mappings. parse_hierarchy(write_hierarchy(h)) == h.
inline void write_hierarchy(std::ostream& out, const Hierarchy& h) {
  std::vector<std::vector<const DescriptorId*>> per_node(h.size());
  for (const auto& [d, nodes] : h.descriptor_map())
    for (auto i : nodes) per_node[i].push_back(&d);
  for (Hierarchy::Index i = 0; i < h.size(); ++i) {
    if (per_node[i].empty()) {
      out << h.code(i) << "\t\t" << h.label(i) << '\n';
      continue;
    }
    for (const auto* d : per_node[i]) out << h.code(i) << '\t' << *d << '\t' << h.label(i) << '\n';
  }
}

struct ArticleNodes {
  std::vector<TreeCode> nodes;  // ascending, unique
  std::size_t unknown_descriptors = 0;
};

inline ArticleNodes treenodes_of_article(const Hierarchy& h,
                                         std::span<const DescriptorId> descriptors) {
  std::set<TreeCode> nodes;
  ArticleNodes out;
  for (const auto& d : descriptors) {
    const auto* idx = h.descriptor_nodes(d);
    if (!idx) {
      ++out.unknown_descriptors;
      continue;
    }
    for (auto i : *idx) nodes.insert(h.code(i));
  }
  out.nodes.assign(nodes.begin(), nodes.end());
  return out;
}

}  // namespace kosrel
