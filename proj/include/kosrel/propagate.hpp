#pragma once

#include <optional>
#include <set>
#include <vector>

#include "kosrel/aspect.hpp"
#include "kosrel/error.hpp"
#include "kosrel/graphmetrics.hpp"
#include "kosrel/hierarchy.hpp"

namespace kosrel {

using HierarchyScores = NodeValues;

/// Bottom-up propagation of graph-metric seeds through the hierarchy.
///
/// Levels are visited deepest first. For every parent of a node on the
/// current level, the pooled child value is the sum of the children's
/// values divided by the number of nodes on the *whole* child level (not the
/// parent's child count). A seeded leaf child takes its seed as value; a
/// child with neither a value nor a seed contributes 0. The parent's value
/// is the pooled child value plus its own seed (0 when unseeded).
///
/// Level-1 nodes hang off a virtual root, which is not part of the output.
/// Every internal node receives a value; leaves only when seeded.
inline HierarchyScores propagate(const Hierarchy& h, const NodeSeedScores& seeds) {
  using Index = Hierarchy::Index;
  std::vector<std::optional<double>> seed(h.size());
  for (const auto& [code, v] : seeds) seed[h.require(code)] = v;

  std::vector<std::optional<double>> value(h.size());
  for (int level = h.max_level(); level >= 1; --level) {
    const auto at_level = h.level_indices(level);
    if (at_level.empty()) continue;
    const double level_size = static_cast<double>(at_level.size());

    std::set<std::optional<Index>> parents;
    for (Index n : at_level) parents.insert(h.parent(n));

    for (const auto& parent : parents) {
      std::vector<Index> children;
      if (parent) {
        auto c = h.children(*parent);
        children.assign(c.begin(), c.end());
      } else {
        auto roots = h.level_indices(1);
        children.assign(roots.begin(), roots.end());
      }
      double pooled = 0.0;
      for (Index child : children) {
        if (seed[child] && h.is_leaf(child)) value[child] = *seed[child];
        pooled += value[child].value_or(0.0);
      }
      pooled /= level_size;
      if (parent) value[*parent] = pooled + seed[*parent].value_or(0.0);
    }
  }

  HierarchyScores out;
  for (Index i = 0; i < h.size(); ++i)
    if (value[i]) out.emplace_hint(out.end(), h.code(i), *value[i]);
  return out;
}

}  // namespace kosrel
