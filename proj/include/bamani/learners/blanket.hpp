#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "bamani/learners/common.hpp"

namespace bamani {

namespace detail {

inline std::vector<NodeId> without(const std::vector<NodeId>& set, NodeId x) {
  std::vector<NodeId> out;
  for (auto v : set)
    if (v != x) out.push_back(v);
  return out;
}

inline std::vector<NodeId> grow_shrink(const TestContext& ctx, NodeId target) {
  std::vector<NodeId> mb;
  auto in_mb = [&](NodeId x) { return std::find(mb.begin(), mb.end(), x) != mb.end(); };
  for (bool changed = true; changed;) {
    changed = false;
    for (NodeId x = 0; x < ctx.size(); ++x) {
      if (x == target || in_mb(x) || mb.size() > ctx.cap()) continue;
      if (!ctx.independent(target, x, mb)) {
        mb.push_back(x);
        changed = true;
      }
    }
  }
  for (auto x : std::vector<NodeId>(mb)) {
    const auto rest = without(mb, x);
    if (ctx.independent(target, x, rest)) mb = rest;
  }
  return mb;
}

inline std::vector<NodeId> iamb(const TestContext& ctx, NodeId target) {
  std::vector<NodeId> mb;
  auto in_mb = [&](NodeId x) { return std::find(mb.begin(), mb.end(), x) != mb.end(); };
  // admitting x tests it given the current blanket, so |Z| = |mb|
  while (mb.size() <= ctx.cap()) {
    std::optional<NodeId> best;
    double best_assoc = -1.0;
    for (NodeId x = 0; x < ctx.size(); ++x) {
      if (x == target || in_mb(x)) continue;
      const double a = ctx.association(target, x, mb);
      if (a > best_assoc) best_assoc = a, best = x;
    }
    if (!best || ctx.independent(target, *best, mb)) break;
    mb.push_back(*best);
  }
  for (bool removed = true; removed;) {
    removed = false;
    for (auto x : std::vector<NodeId>(mb)) {
      const auto rest = without(mb, x);
      if (ctx.independent(target, x, rest)) {
        mb = rest;
        removed = true;
      }
    }
  }
  return mb;
}

// IAMB where each admission and removal round compares Benjamini-Hochberg
// adjusted p-values across the current candidate (or member) set.
inline std::vector<NodeId> iamb_fdr(const TestContext& ctx, NodeId target) {
  std::vector<NodeId> mb;
  auto in_mb = [&](NodeId x) { return std::find(mb.begin(), mb.end(), x) != mb.end(); };
  while (mb.size() <= ctx.cap()) {
    std::vector<NodeId> cand;
    std::vector<double> p;
    std::vector<double> assoc;
    for (NodeId x = 0; x < ctx.size(); ++x) {
      if (x == target || in_mb(x)) continue;
      cand.push_back(x);
      p.push_back(ctx.p_value(target, x, mb));
      assoc.push_back(ctx.association(target, x, mb));
    }
    if (cand.empty()) break;
    const auto adj = benjamini_hochberg(p);
    const auto best = static_cast<std::size_t>(std::max_element(assoc.begin(), assoc.end()) - assoc.begin());
    if (adj[best] >= ctx.alpha()) break;
    mb.push_back(cand[best]);
  }
  while (!mb.empty()) {
    std::vector<double> p;
    for (auto x : mb) p.push_back(ctx.p_value(target, x, without(mb, x)));
    const auto adj = benjamini_hochberg(p);
    const auto worst = static_cast<std::size_t>(std::max_element(adj.begin(), adj.end()) - adj.begin());
    if (adj[worst] < ctx.alpha()) break;
    mb.erase(mb.begin() + static_cast<std::ptrdiff_t>(worst));
  }
  return mb;
}

}  // namespace detail

inline std::vector<NodeId> markov_blanket(const TestContext& ctx, NodeId target, AlgorithmId variant) {
  std::vector<NodeId> mb;
  switch (variant) {
    case AlgorithmId::GS: mb = detail::grow_shrink(ctx, target); break;
    case AlgorithmId::IAMB: mb = detail::iamb(ctx, target); break;
    case AlgorithmId::IAMB_FDR: mb = detail::iamb_fdr(ctx, target); break;
    default: throw ConfigError("variant", "Markov blanket discovery supports GS, IAMB and IAMB_FDR");
  }
  std::sort(mb.begin(), mb.end());
  return mb;
}

inline std::vector<std::string> markov_blanket(const Dataset& d, std::string_view target, AlgorithmId variant,
                                               const LearnerConfig& cfg) {
  const TestContext ctx(d, cfg);
  std::vector<std::string> out;
  for (auto v : markov_blanket(ctx, d.index_of(target), variant)) out.push_back(d.name(v));
  std::sort(out.begin(), out.end());
  return out;
}

struct BlanketPdagResult {
  Pdag pdag;
  SepsetTable sepsets;
};

// Neighbours within (symmetry-corrected) blankets: x and y stay adjacent
// unless some subset of the smaller of B(x)\{y}, B(y)\{x} separates them.
inline BlanketPdagResult mb_to_pdag(const TestContext& ctx, std::vector<std::vector<NodeId>> blankets,
                                    const ConstraintMask& mask) {
  const auto n = ctx.size();
  std::vector<std::vector<char>> in_mb(n, std::vector<char>(n, 0));
  for (NodeId v = 0; v < n; ++v)
    for (auto u : blankets[v]) in_mb[v][u] = 1;
  for (NodeId v = 0; v < n; ++v) {
    std::vector<NodeId> sym;
    for (auto u : blankets[v])
      if (in_mb[u][v]) sym.push_back(u);
    blankets[v] = std::move(sym);
  }

  std::vector<std::vector<char>> adjacent(n, std::vector<char>(n, 0));
  SepsetTable sepsets;
  auto contains = [](const std::vector<NodeId>& s, NodeId x) { return std::find(s.begin(), s.end(), x) != s.end(); };
  for (NodeId x = 0; x < n; ++x)
    for (NodeId y = x + 1; y < n; ++y) {
      if (mask.required_either(x, y)) {
        adjacent[x][y] = adjacent[y][x] = 1;
        continue;
      }
      if (mask.forbidden_both(x, y)) {
        sepsets.set_constraint_removed(x, y);
        continue;
      }
      if (!contains(blankets[x], y)) {
        // Not in each other's blanket: separated by the blanket itself.
        sepsets.set(x, y, blankets[x]);
        continue;
      }
      auto bx = detail::without(blankets[x], y);
      auto by = detail::without(blankets[y], x);
      const auto& pool = by.size() < bx.size() ? by : bx;
      std::vector<NodeId> found;
      const bool separated = for_each_subset(pool, ctx.cap(), [&](const std::vector<NodeId>& s) {
        if (ctx.independent(x, y, s)) {
          found = s;
          return true;
        }
        return false;
      });
      if (separated)
        sepsets.set(x, y, found);
      else
        adjacent[x][y] = adjacent[y][x] = 1;
    }
  return {orient_skeleton(ctx.nodes(), adjacent, sepsets, mask), std::move(sepsets)};
}

inline Pdag mb_to_pdag(const Dataset& d, const std::map<std::string, std::vector<std::string>>& blankets,
                       const LearnerConfig& cfg, const ConstraintSpec& constraints = {}) {
  const TestContext ctx(d, cfg);
  std::vector<std::vector<NodeId>> ids(d.n_features());
  for (const auto& [node, members] : blankets)
    for (const auto& m : members) ids[d.index_of(node)].push_back(d.index_of(m));
  return mb_to_pdag(ctx, std::move(ids), ConstraintMask(constraints, ctx.nodes())).pdag;
}

}  // namespace bamani
