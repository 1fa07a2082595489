#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "kosrel/corpus.hpp"
#include "kosrel/hierarchy.hpp"

namespace kosrel {

/// Article id -> directly mapped tree nodes (ascending, unique), resolved
/// once from descriptor annotations.
class ArticleNodeIndex {
 public:
  using Index = Hierarchy::Index;

  ArticleNodeIndex() : offsets_(1, 0) {}

  ArticleNodeIndex(const ArticleStore& store, const Hierarchy& h) : offsets_(1, 0) {
    ids_.reserve(store.size());
    std::vector<Index> scratch;
    for (const auto& a : store.articles()) {
      scratch.clear();
      for (const auto& d : a.descriptors) {
        const auto* idx = h.descriptor_nodes(d);
        if (!idx) {
          ++unknown_;
          continue;
        }
        scratch.insert(scratch.end(), idx->begin(), idx->end());
      }
      std::sort(scratch.begin(), scratch.end());
      scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
      ids_.push_back(a.id);
      nodes_.insert(nodes_.end(), scratch.begin(), scratch.end());
      offsets_.push_back(nodes_.size());
    }
  }

  /// Empty span for unknown ids.
  std::span<const Index> nodes_of(ArticleId id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return {};
    const auto k = static_cast<std::size_t>(it - ids_.begin());
    return {nodes_.data() + offsets_[k], nodes_.data() + offsets_[k + 1]};
  }

  /// Annotation occurrences whose descriptor is absent from the hierarchy.
  std::size_t unknown_descriptors() const noexcept { return unknown_; }

 private:
  std::vector<ArticleId> ids_;
  std::vector<std::size_t> offsets_;
  std::vector<Index> nodes_;
  std::size_t unknown_ = 0;
};

}  // namespace kosrel
