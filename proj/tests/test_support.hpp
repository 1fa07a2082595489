#pragma once

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "kosrel/citegraph.hpp"
#include "kosrel/hierarchy.hpp"
#include "kosrel/rng.hpp"
#include "oracles.hpp"

namespace testing_support {

/// Graph whose article ids equal the oracle's node numbers 0..n-1.
inline kosrel::CitationGraph graph_from(int n, const oracle::EdgeList& edges) {
  std::vector<kosrel::ArticleId> ids(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = static_cast<kosrel::ArticleId>(i);
  std::vector<std::pair<kosrel::CitationGraph::Index, kosrel::CitationGraph::Index>> idx;
  for (auto [u, v] : edges)
    idx.emplace_back(static_cast<kosrel::CitationGraph::Index>(u), static_cast<kosrel::CitationGraph::Index>(v));
  return kosrel::CitationGraph::from_index_edges(std::move(ids), std::move(idx));
}

/// Random forest of tree codes with at most `max_nodes` nodes and depth
/// `max_depth`.
inline kosrel::Hierarchy random_hierarchy(kosrel::Rng& rng, std::size_t max_nodes, int max_depth) {
  kosrel::Hierarchy::Builder b;
  std::size_t count = 0;
  struct Item {
    std::string code;
    int depth;
  };
  std::vector<Item> stack;
  const int roots = 1 + static_cast<int>(rng.below(4));
  for (int r = 0; r < roots; ++r) {
    std::string code(1, static_cast<char>('A' + r));
    b.add_node(kosrel::TreeCode::parse(code), "");
    ++count;
    stack.push_back({code, 1});
  }
  while (!stack.empty() && count < max_nodes) {
    auto item = stack.front();
    stack.erase(stack.begin());
    if (item.depth >= max_depth) continue;
    const int kids = static_cast<int>(rng.below(5));
    for (int k = 1; k <= kids && count < max_nodes; ++k) {
      char buf[8];
      if (item.depth == 1)
        std::snprintf(buf, sizeof buf, "%02d", k);
      else
        std::snprintf(buf, sizeof buf, ".%03d", k);
      std::string code = item.code + buf;
      b.add_node(kosrel::TreeCode::parse(code), "");
      ++count;
      stack.push_back({code, item.depth + 1});
    }
  }
  return b.build();
}

inline oracle::Tree tree_of(const kosrel::Hierarchy& h) {
  oracle::Tree t;
  const auto n = h.size();
  t.parent.assign(n, -1);
  t.level.assign(n, 0);
  t.children.assign(n, {});
  for (kosrel::Hierarchy::Index i = 0; i < n; ++i) {
    t.level[i] = h.code(i).level();
    if (auto p = h.code(i).parent()) {
      const int pi = static_cast<int>(*h.index_of(*p));
      t.parent[i] = pi;
      t.children[static_cast<std::size_t>(pi)].push_back(static_cast<int>(i));
    }
  }
  return t;
}

}  // namespace testing_support
