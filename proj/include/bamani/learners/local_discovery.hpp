#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "bamani/learners/common.hpp"

namespace bamani {

// Candidate parents-and-children set per node, indexed by NodeId.
using ParentChildSets = std::vector<std::vector<NodeId>>;

namespace detail {

inline bool contains(const std::vector<NodeId>& s, NodeId x) { return std::find(s.begin(), s.end(), x) != s.end(); }

// Keep y in PC(x) only when x is in PC(y) as well; whitelisted pairs stay.
inline ParentChildSets symmetrize(ParentChildSets pcs, const ConstraintMask& mask) {
  const auto n = pcs.size();
  ParentChildSets out(n);
  for (NodeId x = 0; x < n; ++x)
    for (NodeId y = 0; y < n; ++y) {
      if (x == y) continue;
      const bool both = contains(pcs[x], y) && contains(pcs[y], x);
      if (both || mask.required_either(x, y)) out[x].push_back(y);
    }
  return out;
}

inline std::vector<NodeId> forced_neighbours(const TestContext& ctx, const ConstraintMask& mask, NodeId target) {
  std::vector<NodeId> out;
  for (NodeId x = 0; x < ctx.size(); ++x)
    if (x != target && mask.required_either(target, x)) out.push_back(x);
  return out;
}

// Does some subset of `pool` (up to the conditioning cap) separate target and x?
inline bool separable(const TestContext& ctx, NodeId target, NodeId x, const std::vector<NodeId>& pool) {
  return for_each_subset(pool, ctx.cap(), [&](const std::vector<NodeId>& s) { return ctx.independent(target, x, s); });
}

inline std::vector<NodeId> mmpc_target(const TestContext& ctx, const ConstraintMask& mask, NodeId target) {
  auto cpc = forced_neighbours(ctx, mask, target);
  struct Candidate {
    NodeId id;
    double min_assoc;
    double max_p;
  };
  std::vector<Candidate> open;
  for (NodeId x = 0; x < ctx.size(); ++x) {
    if (x == target || contains(cpc, x) || mask.forbidden_both(target, x)) continue;
    Candidate c{x, ctx.association(target, x, {}), ctx.p_value(target, x, {})};
    open.push_back(c);
  }
  // Fold the subsets that contain `member` into each candidate's running
  // minimum association / maximum p-value.
  auto update = [&](Candidate& c, NodeId member, const std::vector<NodeId>& others) {
    if (ctx.cap() == 0) return;
    for_each_subset(others, ctx.cap() - 1, [&](const std::vector<NodeId>& s) {
      auto z = s;
      z.push_back(member);
      std::sort(z.begin(), z.end());
      c.min_assoc = std::min(c.min_assoc, ctx.association(target, c.id, z));
      c.max_p = std::max(c.max_p, ctx.p_value(target, c.id, z));
      return c.max_p >= ctx.alpha();
    });
  };
  for (std::size_t i = 0; i < cpc.size(); ++i) {
    const std::vector<NodeId> before(cpc.begin(), cpc.begin() + static_cast<std::ptrdiff_t>(i));
    for (auto& c : open) update(c, cpc[i], before);
  }

  for (;;) {
    std::erase_if(open, [&](const Candidate& c) { return c.max_p >= ctx.alpha(); });
    if (open.empty()) break;
    auto best = std::max_element(open.begin(), open.end(),
                                 [](const Candidate& a, const Candidate& b) { return a.min_assoc < b.min_assoc; });
    const NodeId chosen = best->id;
    const auto before = cpc;
    cpc.push_back(chosen);
    open.erase(best);
    for (auto& c : open) update(c, chosen, before);
  }

  for (auto x : std::vector<NodeId>(cpc)) {
    if (mask.required_either(target, x)) continue;
    std::vector<NodeId> rest;
    for (auto y : cpc)
      if (y != x) rest.push_back(y);
    if (separable(ctx, target, x, rest)) cpc = rest;
  }
  std::sort(cpc.begin(), cpc.end());
  return cpc;
}

inline std::vector<NodeId> hiton_target(const TestContext& ctx, const ConstraintMask& mask, NodeId target) {
  auto cpc = forced_neighbours(ctx, mask, target);
  std::vector<std::pair<double, NodeId>> order;
  for (NodeId x = 0; x < ctx.size(); ++x) {
    if (x == target || contains(cpc, x) || mask.forbidden_both(target, x)) continue;
    if (ctx.independent(target, x, {})) continue;
    order.emplace_back(ctx.association(target, x, {}), x);
  }
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  for (const auto& [_, x] : order) {
    cpc.push_back(x);
    for (auto y : std::vector<NodeId>(cpc)) {
      if (mask.required_either(target, y)) continue;
      std::vector<NodeId> rest;
      for (auto w : cpc)
        if (w != y) rest.push_back(w);
      if (separable(ctx, target, y, rest)) cpc = rest;
    }
  }
  std::sort(cpc.begin(), cpc.end());
  return cpc;
}

}  // namespace detail

// Max-min parents and children: forward phase admits the candidate whose
// minimum association over subsets of the current set is largest; backward
// phase drops members separable by a subset of the others.
inline ParentChildSets mmpc(const TestContext& ctx, const ConstraintMask& mask) {
  ParentChildSets pcs(ctx.size());
  for (NodeId t = 0; t < ctx.size(); ++t) pcs[t] = detail::mmpc_target(ctx, mask, t);
  return detail::symmetrize(std::move(pcs), mask);
}

// Interleaved HITON-PC: candidates enter by decreasing marginal association;
// after each admission every member is re-tested against subsets of the rest.
inline ParentChildSets hiton_pc(const TestContext& ctx, const ConstraintMask& mask) {
  ParentChildSets pcs(ctx.size());
  for (NodeId t = 0; t < ctx.size(); ++t) pcs[t] = detail::hiton_target(ctx, mask, t);
  return detail::symmetrize(std::move(pcs), mask);
}

inline std::map<std::string, std::vector<std::string>> mmpc(const Dataset& d, const LearnerConfig& cfg,
                                                            const ConstraintSpec& constraints = {}) {
  const TestContext ctx(d, cfg);
  return named_sets(ctx.nodes(), mmpc(ctx, ConstraintMask(constraints, ctx.nodes())));
}

inline std::map<std::string, std::vector<std::string>> hiton_pc(const Dataset& d, const LearnerConfig& cfg,
                                                                const ConstraintSpec& constraints = {}) {
  const TestContext ctx(d, cfg);
  return named_sets(ctx.nodes(), hiton_pc(ctx, ConstraintMask(constraints, ctx.nodes())));
}

}  // namespace bamani
