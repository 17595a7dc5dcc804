#pragma once

#include <string>

#include "bamani/learners/blanket.hpp"
#include "bamani/learners/common.hpp"
#include "bamani/learners/local_discovery.hpp"
#include "bamani/learners/pc_stable.hpp"
#include "bamani/learners/score_search.hpp"

namespace bamani {

// Restrict phase (MMPC or HITON-PC) followed by score search in which u -> v
// is allowed only when u is a candidate neighbour of v.
inline Dag restrict_maximize(const Dataset& d, const LearnerConfig& cfg, const ConstraintMask& mask) {
  cfg.validate();
  const TestContext ctx(d, cfg);
  const auto pcs = cfg.restrict_phase == AlgorithmId::MMPC ? mmpc(ctx, mask) : hiton_pc(ctx, mask);
  ConstraintMask restricted = mask;
  for (NodeId v = 0; v < pcs.size(); ++v)
    for (NodeId u = 0; u < pcs.size(); ++u)
      if (u != v && !detail::contains(pcs[v], u)) restricted.forbid(u, v);
  return cfg.maximize_phase == AlgorithmId::HC ? hill_climb_search(d, restricted, cfg).dag
                                               : tabu_search_run(d, restricted, cfg).dag;
}

inline Dag restrict_maximize(const Dataset& d, const LearnerConfig& cfg, const ConstraintSpec& constraints = {}) {
  return restrict_maximize(d, cfg, ConstraintMask(constraints, NodeSet(d.names())));
}

namespace detail {

inline Dag blanket_learner(const Dataset& d, const LearnerConfig& cfg, const ConstraintMask& mask, AlgorithmId variant) {
  const TestContext ctx(d, cfg);
  std::vector<std::vector<NodeId>> blankets(ctx.size());
  for (NodeId v = 0; v < ctx.size(); ++v) blankets[v] = markov_blanket(ctx, v, variant);
  return pdag_to_dag(mb_to_pdag(ctx, std::move(blankets), mask).pdag);
}

inline void check_constraints(const Dag& g, const ConstraintMask& mask, AlgorithmId alg) {
  for (NodeId u = 0; u < g.size(); ++u)
    for (NodeId v = 0; v < g.size(); ++v) {
      if (mask.required(u, v) && !g.has_arc(u, v))
        throw Error("internal error: " + to_string(alg) + " dropped whitelisted arc " + g.name(u) + "->" + g.name(v));
      if (mask.forbidden(u, v) && g.has_arc(u, v))
        throw Error("internal error: " + to_string(alg) + " produced blacklisted arc " + g.name(u) + "->" + g.name(v));
    }
}

}  // namespace detail

inline Dag learn(AlgorithmId alg, const Dataset& d, const ConstraintMask& mask, const LearnerConfig& cfg) {
  cfg.validate();
  Dag g;
  switch (alg) {
    case AlgorithmId::GS:
    case AlgorithmId::IAMB:
    case AlgorithmId::IAMB_FDR: g = detail::blanket_learner(d, cfg, mask, alg); break;
    case AlgorithmId::PC_STABLE: {
      const TestContext ctx(d, cfg);
      g = pdag_to_dag(pc_stable_detailed(ctx, mask).pdag);
      break;
    }
    case AlgorithmId::HC: g = hill_climb_search(d, mask, cfg).dag; break;
    case AlgorithmId::TABU: g = tabu_search_run(d, mask, cfg).dag; break;
    case AlgorithmId::MMHC: {
      LearnerConfig c = cfg;
      c.restrict_phase = AlgorithmId::MMPC;
      c.maximize_phase = AlgorithmId::HC;
      g = restrict_maximize(d, c, mask);
      break;
    }
    case AlgorithmId::RSMAX2: g = restrict_maximize(d, cfg, mask); break;
    case AlgorithmId::MMPC:
    case AlgorithmId::HITON_PC:
      throw ConfigError("algorithm", to_string(alg) + " is a restrict phase, not a structure learner");
  }
  detail::check_constraints(g, mask, alg);
  return g;
}

inline Dag learn(AlgorithmId alg, const Dataset& d, const ConstraintSpec& constraints, const LearnerConfig& cfg) {
  return learn(alg, d, ConstraintMask(constraints, NodeSet(d.names())), cfg);
}

}  // namespace bamani
