#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bamani/dataset.hpp"
#include "bamani/error.hpp"
#include "bamani/graph.hpp"
#include "bamani/log.hpp"
#include "bamani/stats.hpp"

namespace bamani {

enum class AlgorithmId { GS, IAMB, IAMB_FDR, PC_STABLE, HC, TABU, MMHC, RSMAX2, MMPC, HITON_PC };

inline constexpr AlgorithmId kTopLevelAlgorithms[] = {AlgorithmId::GS,   AlgorithmId::IAMB,     AlgorithmId::IAMB_FDR,
                                                      AlgorithmId::PC_STABLE, AlgorithmId::HC,  AlgorithmId::TABU,
                                                      AlgorithmId::MMHC, AlgorithmId::RSMAX2};

inline bool is_top_level(AlgorithmId a) { return a != AlgorithmId::MMPC && a != AlgorithmId::HITON_PC; }

inline std::string to_string(AlgorithmId a) {
  switch (a) {
    case AlgorithmId::GS: return "GS";
    case AlgorithmId::IAMB: return "IAMB";
    case AlgorithmId::IAMB_FDR: return "IAMB_FDR";
    case AlgorithmId::PC_STABLE: return "PC_STABLE";
    case AlgorithmId::HC: return "HC";
    case AlgorithmId::TABU: return "TABU";
    case AlgorithmId::MMHC: return "MMHC";
    case AlgorithmId::RSMAX2: return "RSMAX2";
    case AlgorithmId::MMPC: return "MMPC";
    case AlgorithmId::HITON_PC: return "HITON_PC";
  }
  return "?";
}

// Accepts the canonical names and the dotted spellings (IAMB.FDR, PC.STABLE,
// SI.HITON.PC), case-insensitively.
inline std::optional<AlgorithmId> parse_algorithm(std::string_view text) {
  std::string s;
  for (char c : text) s += (c == '.' || c == '-') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (s == "SI_HITON_PC") s = "HITON_PC";
  for (auto a : {AlgorithmId::GS, AlgorithmId::IAMB, AlgorithmId::IAMB_FDR, AlgorithmId::PC_STABLE, AlgorithmId::HC,
                 AlgorithmId::TABU, AlgorithmId::MMHC, AlgorithmId::RSMAX2, AlgorithmId::MMPC, AlgorithmId::HITON_PC})
    if (to_string(a) == s) return a;
  return std::nullopt;
}

inline AlgorithmId algorithm_from_string(std::string_view text) {
  if (auto a = parse_algorithm(text)) return *a;
  throw ConfigError("algorithm", "unknown algorithm '" + std::string(text) + "'");
}

struct LearnerConfig {
  double alpha = 0.05;
  // Cap on conditioning-set size; default min(N_f - 2, n_obs / 10).
  std::optional<std::size_t> max_conditioning;
  std::size_t tabu_length = 10;
  std::size_t max_iterations = 1000;
  AlgorithmId restrict_phase = AlgorithmId::HITON_PC;
  AlgorithmId maximize_phase = AlgorithmId::TABU;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha", "must lie in (0, 1)");
    if (max_iterations == 0) throw ConfigError("max_iterations", "must be positive");
    if (restrict_phase != AlgorithmId::MMPC && restrict_phase != AlgorithmId::HITON_PC)
      throw ConfigError("restrict", "must be MMPC or HITON_PC");
    if (maximize_phase != AlgorithmId::HC && maximize_phase != AlgorithmId::TABU)
      throw ConfigError("maximize", "must be HC or TABU");
  }

  std::size_t conditioning_cap(std::size_t n_features, std::size_t n_obs) const {
    if (max_conditioning) return *max_conditioning;
    const std::size_t by_features = n_features >= 2 ? n_features - 2 : 0;
    return std::min(by_features, n_obs / 10);
  }
};

// Correlation-based CI testing on one dataset, shared by the
// constraint-based and local-discovery learners.
class TestContext {
 public:
  TestContext(const Dataset& d, const LearnerConfig& cfg)
      : nodes_(d.names()),
        corr_(correlation_matrix(d, true)),
        n_obs_(d.n_obs()),
        alpha_(cfg.alpha),
        cap_(cfg.conditioning_cap(d.n_features(), d.n_obs())) {
    cfg.validate();
  }

  const NodeSet& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t n_obs() const { return n_obs_; }
  double alpha() const { return alpha_; }
  std::size_t cap() const { return cap_; }

  // p-value of x _||_ y | z. A degenerate test (collinear conditioning set)
  // counts as independence: z already explains x or y.
  double p_value(NodeId x, NodeId y, const std::vector<NodeId>& z) const {
    check_dof(z);
    try {
      return ci_test(corr_, n_obs_, x, y, z).p_value;
    } catch (const DegenerateTestError&) {
      return 1.0;
    }
  }

  double association(NodeId x, NodeId y, const std::vector<NodeId>& z) const {
    check_dof(z);
    try {
      return gauss_mi_from_correlation(partial_correlation(corr_, x, y, z)).value;
    } catch (const DegenerateTestError&) {
      return 0.0;
    }
  }

  bool independent(NodeId x, NodeId y, const std::vector<NodeId>& z) const { return p_value(x, y, z) >= alpha_; }

 private:
  void check_dof(const std::vector<NodeId>& z) const {
    if (static_cast<long>(n_obs_) - static_cast<long>(z.size()) - 2 < 1) {
      std::string set;
      for (auto v : z) set += (set.empty() ? "" : ",") + nodes_.name(v);
      throw DegenerateTestError("degrees of freedom exhausted: n_obs=" + std::to_string(n_obs_) +
                                " with conditioning set {" + set + "}");
    }
  }

  NodeSet nodes_;
  CorrelationMatrix corr_;
  std::size_t n_obs_;
  double alpha_;
  std::size_t cap_;
};

// Visit the k-element subsets of `pool` in lexicographic order of positions.
// Stops early when `f` returns true; returns whether it stopped.
template <typename F>
bool for_each_combination(const std::vector<NodeId>& pool, std::size_t k, F&& f) {
  const std::size_t m = pool.size();
  if (k > m) return false;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<NodeId> subset(k);
  for (;;) {
    for (std::size_t i = 0; i < k; ++i) subset[i] = pool[idx[i]];
    if (f(static_cast<const std::vector<NodeId>&>(subset))) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == m - k + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// All subsets of `pool` with at most `max_size` elements, smallest first.
template <typename F>
bool for_each_subset(const std::vector<NodeId>& pool, std::size_t max_size, F&& f) {
  for (std::size_t k = 0; k <= std::min(max_size, pool.size()); ++k)
    if (for_each_combination(pool, k, f)) return true;
  return false;
}

// Benjamini-Hochberg adjusted p-values, in input order.
inline std::vector<double> benjamini_hochberg(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] < p[b]; });
  std::vector<double> adj(m);
  double running = 1.0;
  for (std::size_t r = m; r-- > 0;) {
    const double v = p[order[r]] * static_cast<double>(m) / static_cast<double>(r + 1);
    running = std::min(running, v);
    adj[order[r]] = std::min(running, 1.0);
  }
  return adj;
}

// Separating sets of pairs removed from a learned skeleton. Pairs removed
// only because both arc directions are blacklisted are marked separately and
// never produce v-structures.
class SepsetTable {
 public:
  using Key = std::pair<NodeId, NodeId>;

  void set(NodeId a, NodeId b, std::vector<NodeId> sepset) { table_[key(a, b)] = std::move(sepset); }
  void set_constraint_removed(NodeId a, NodeId b) {
    table_[key(a, b)] = {};
    constraint_removed_.insert(key(a, b));
  }

  bool contains(NodeId a, NodeId b) const { return table_.count(key(a, b)) > 0; }
  bool constraint_removed(NodeId a, NodeId b) const { return constraint_removed_.count(key(a, b)) > 0; }
  const std::vector<NodeId>* find(NodeId a, NodeId b) const {
    auto it = table_.find(key(a, b));
    return it == table_.end() ? nullptr : &it->second;
  }
  const std::map<Key, std::vector<NodeId>>& entries() const { return table_; }

 private:
  static Key key(NodeId a, NodeId b) { return a < b ? Key{a, b} : Key{b, a}; }

  std::map<Key, std::vector<NodeId>> table_;
  std::set<Key> constraint_removed_;
};

// Skeleton plus separating sets to PDAG: constraint orientations first
// (whitelisted arcs, then the allowed direction of half-blacklisted pairs),
// then unshielded colliders, then Meek closure. An orientation that conflicts
// with an existing one or would close a cycle is skipped; a half-blacklisted
// edge whose only allowed direction closes a cycle is dropped.
inline Pdag orient_skeleton(const NodeSet& nodes, const std::vector<std::vector<char>>& adjacent,
                            const SepsetTable& sepsets, const ConstraintMask& mask) {
  const auto n = nodes.size();
  Pdag p(nodes.names());
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (adjacent[u][v]) p.add_undirected(u, v);

  const auto order = nodes.by_name();
  for (auto u : order)
    for (auto v : order)
      if (mask.required(u, v) && p.has_undirected(u, v)) p.orient(u, v);
  for (auto u : order)
    for (auto v : order) {
      if (!p.has_undirected(u, v) || !mask.forbidden(u, v) || mask.forbidden(v, u)) continue;
      if (p.directed_path(u, v))
        p.remove_edge(u, v);
      else
        p.orient(v, u);
    }

  auto try_orient = [&](NodeId a, NodeId b) {
    if (p.has_undirected(a, b) && !mask.forbidden(a, b) && !p.directed_path(b, a)) p.orient(a, b);
  };
  for (auto z : order) {
    std::vector<NodeId> nbrs;
    for (auto v : order)
      if (v != z && p.adjacent(z, v)) nbrs.push_back(v);
    for (std::size_t i = 0; i < nbrs.size(); ++i)
      for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
        const auto x = nbrs[i], y = nbrs[j];
        if (p.adjacent(x, y)) continue;
        const auto* s = sepsets.find(x, y);
        if (!s || sepsets.constraint_removed(x, y)) continue;
        if (std::find(s->begin(), s->end(), z) != s->end()) continue;
        try_orient(x, z);
        try_orient(y, z);
      }
  }
  return meek_closure(std::move(p));
}

// DAG extension of a learned PDAG. When sampling noise makes the PDAG
// non-extendable, remaining undirected edges follow a topological order of
// the directed part instead.
inline Dag pdag_to_dag(const Pdag& p) {
  try {
    return extend_to_dag(p);
  } catch (const NotExtendableError& e) {
    Dag directed(p.names());
    for (auto [u, v] : p.directed_arcs()) directed.add_arc(u, v);
    const auto order = topological_order(directed);
    std::vector<std::size_t> pos(p.size());
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    for (auto [u, v] : p.undirected_edges()) {
      if (pos[u] < pos[v])
        directed.add_arc(u, v);
      else
        directed.add_arc(v, u);
    }
    return directed;
  }
}

inline ConstraintMask make_mask(const ConstraintSpec& spec, const NodeSet& nodes) { return ConstraintMask(spec, nodes); }

// Name-keyed view of per-node sets.
inline std::map<std::string, std::vector<std::string>> named_sets(const NodeSet& nodes,
                                                                   const std::vector<std::vector<NodeId>>& sets) {
  std::map<std::string, std::vector<std::string>> out;
  for (NodeId v = 0; v < sets.size(); ++v) {
    std::vector<std::string> names;
    for (auto u : sets[v]) names.push_back(nodes.name(u));
    std::sort(names.begin(), names.end());
    out[nodes.name(v)] = std::move(names);
  }
  return out;
}

}  // namespace bamani
