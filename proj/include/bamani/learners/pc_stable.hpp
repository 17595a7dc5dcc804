#pragma once

#include <vector>

#include "bamani/learners/common.hpp"

namespace bamani {

struct PcResult {
  Pdag pdag;
  SepsetTable sepsets;
  std::vector<std::vector<char>> skeleton;
};

// Order-independent ("stable") PC: within a level, conditioning sets are drawn
// from adjacency snapshots taken when the level starts.
inline PcResult pc_stable_detailed(const TestContext& ctx, const ConstraintMask& mask) {
  const auto n = ctx.size();
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  SepsetTable sepsets;
  for (NodeId x = 0; x < n; ++x)
    for (NodeId y = x + 1; y < n; ++y) {
      if (mask.forbidden_both(x, y)) {
        sepsets.set_constraint_removed(x, y);
        continue;
      }
      adj[x][y] = adj[y][x] = 1;
    }

  for (std::size_t level = 0; level <= ctx.cap(); ++level) {
    std::vector<std::vector<NodeId>> snapshot(n);
    for (NodeId x = 0; x < n; ++x)
      for (NodeId y = 0; y < n; ++y)
        if (adj[x][y]) snapshot[x].push_back(y);

    bool testable = false;
    for (NodeId x = 0; x < n; ++x)
      for (auto y : snapshot[x]) {
        if (!adj[x][y] || mask.required_either(x, y)) continue;
        std::vector<NodeId> pool;
        for (auto w : snapshot[x])
          if (w != y) pool.push_back(w);
        if (pool.size() < level) continue;
        testable = true;
        std::vector<NodeId> found;
        const bool separated = for_each_combination(pool, level, [&](const std::vector<NodeId>& s) {
          if (ctx.independent(x, y, s)) {
            found = s;
            return true;
          }
          return false;
        });
        if (separated) {
          adj[x][y] = adj[y][x] = 0;
          sepsets.set(x, y, found);
        }
      }
    if (!testable) break;
  }
  auto pdag = orient_skeleton(ctx.nodes(), adj, sepsets, mask);
  return {std::move(pdag), std::move(sepsets), std::move(adj)};
}

inline Pdag pc_stable(const Dataset& d, const LearnerConfig& cfg, const ConstraintSpec& constraints = {}) {
  const TestContext ctx(d, cfg);
  return pc_stable_detailed(ctx, ConstraintMask(constraints, ctx.nodes())).pdag;
}

}  // namespace bamani
