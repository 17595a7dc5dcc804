#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bamani/dataset.hpp"
#include "bamani/error.hpp"

namespace bamani {

struct Arc {
  std::string from;
  std::string to;

  auto operator<=>(const Arc&) const = default;
};

using ArcSet = std::set<Arc>;

inline std::string to_string(const Arc& a) { return a.from + "->" + a.to; }

namespace detail {

inline std::vector<std::size_t> name_ranks(const std::vector<std::string>& names) {
  std::vector<std::size_t> order(names.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return names[a] < names[b]; });
  std::vector<std::size_t> rank(names.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
  return rank;
}

inline void check_unique_names(const std::vector<std::string>& names) {
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw GraphError("empty node name");
    if (!seen.insert(n).second) throw GraphError("duplicate node '" + n + "'");
  }
}

}  // namespace detail

// Node naming shared by Dag and Pdag.
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(std::vector<std::string> names) : names_(std::move(names)) {
    detail::check_unique_names(names_);
    rank_ = detail::name_ranks(names_);
  }

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(NodeId i) const { return names_.at(i); }
  // Position of the node in lexicographic name order; used for tie-breaks.
  std::size_t rank(NodeId i) const { return rank_[i]; }

  bool contains(std::string_view name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
  }
  NodeId index_of(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw GraphError("unknown node '" + std::string(name) + "'");
    return static_cast<NodeId>(it - names_.begin());
  }

  // Node ids sorted by name.
  std::vector<NodeId> by_name() const {
    std::vector<NodeId> ids(size());
    for (NodeId i = 0; i < size(); ++i) ids[rank_[i]] = i;
    return ids;
  }

  friend bool operator==(const NodeSet& a, const NodeSet& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::vector<std::size_t> rank_;
};

// Directed acyclic graph over named nodes. Every mutation keeps the graph
// acyclic and free of self loops.
class Dag {
 public:
  Dag() = default;
  explicit Dag(std::vector<std::string> names)
      : nodes_(std::move(names)), adj_(nodes_.size() * nodes_.size(), 0) {}

  Dag(std::vector<std::string> names, const std::vector<Arc>& arcs) : Dag(std::move(names)) {
    for (const auto& a : arcs) add_arc(a.from, a.to);
  }

  std::size_t size() const { return nodes_.size(); }
  const NodeSet& nodes() const { return nodes_; }
  const std::vector<std::string>& names() const { return nodes_.names(); }
  const std::string& name(NodeId i) const { return nodes_.name(i); }
  NodeId index_of(std::string_view name) const { return nodes_.index_of(name); }

  bool has_arc(NodeId u, NodeId v) const { return adj_[u * size() + v] != 0; }
  bool has_arc(std::string_view u, std::string_view v) const { return has_arc(index_of(u), index_of(v)); }
  bool adjacent(NodeId u, NodeId v) const { return has_arc(u, v) || has_arc(v, u); }

  // True iff a directed path from -> ... -> to exists (length >= 1).
  bool has_path(NodeId from, NodeId to) const {
    std::vector<char> seen(size(), 0);
    std::vector<NodeId> stack{from};
    while (!stack.empty()) {
      const NodeId n = stack.back();
      stack.pop_back();
      for (NodeId c = 0; c < size(); ++c) {
        if (!has_arc(n, c) || seen[c]) continue;
        if (c == to) return true;
        seen[c] = 1;
        stack.push_back(c);
      }
    }
    return false;
  }

  void add_arc(NodeId u, NodeId v) {
    check_pair(u, v);
    if (has_arc(u, v)) return;
    if (u == v || has_path(v, u))
      throw GraphError("arc " + name(u) + "->" + name(v) + " would create a directed cycle");
    adj_[u * size() + v] = 1;
  }
  void add_arc(std::string_view u, std::string_view v) { add_arc(index_of(u), index_of(v)); }

  void remove_arc(NodeId u, NodeId v) { adj_[u * size() + v] = 0; }
  void remove_arc(std::string_view u, std::string_view v) { remove_arc(index_of(u), index_of(v)); }

  std::vector<NodeId> parents(NodeId v) const {
    std::vector<NodeId> out;
    for (NodeId u = 0; u < size(); ++u)
      if (has_arc(u, v)) out.push_back(u);
    return out;
  }
  std::vector<NodeId> children(NodeId u) const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < size(); ++v)
      if (has_arc(u, v)) out.push_back(v);
    return out;
  }
  std::vector<std::string> parent_names(std::string_view v) const { return parent_names(index_of(v)); }
  std::vector<std::string> parent_names(NodeId v) const {
    std::vector<std::string> out;
    for (auto p : parents(v)) out.push_back(name(p));
    std::sort(out.begin(), out.end());
    return out;
  }

  std::size_t arc_count() const {
    return static_cast<std::size_t>(std::count(adj_.begin(), adj_.end(), std::uint8_t{1}));
  }

  std::vector<std::pair<NodeId, NodeId>> index_arcs() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    for (NodeId u = 0; u < size(); ++u)
      for (NodeId v = 0; v < size(); ++v)
        if (has_arc(u, v)) out.emplace_back(u, v);
    return out;
  }

  // Arcs by name, lexicographically sorted.
  std::vector<Arc> arcs() const {
    std::vector<Arc> out;
    for (auto [u, v] : index_arcs()) out.push_back({name(u), name(v)});
    std::sort(out.begin(), out.end());
    return out;
  }
  ArcSet arc_set() const {
    auto a = arcs();
    return ArcSet(a.begin(), a.end());
  }

  friend bool operator==(const Dag& a, const Dag& b) { return a.nodes_ == b.nodes_ && a.adj_ == b.adj_; }

 private:
  void check_pair(NodeId u, NodeId v) const {
    if (u >= size() || v >= size()) throw GraphError("node index out of range");
    if (u == v) throw GraphError("self-loop on '" + name(u) + "'");
  }

  NodeSet nodes_;
  std::vector<std::uint8_t> adj_;
};

// Partially directed graph: each adjacent pair is either a directed arc or an
// undirected edge, never both.
class Pdag {
 public:
  Pdag() = default;
  explicit Pdag(std::vector<std::string> names)
      : nodes_(std::move(names)), dir_(nodes_.size() * nodes_.size(), 0), und_(nodes_.size() * nodes_.size(), 0) {}

  std::size_t size() const { return nodes_.size(); }
  const NodeSet& nodes() const { return nodes_; }
  const std::vector<std::string>& names() const { return nodes_.names(); }
  const std::string& name(NodeId i) const { return nodes_.name(i); }
  NodeId index_of(std::string_view name) const { return nodes_.index_of(name); }

  bool has_directed(NodeId u, NodeId v) const { return dir_[u * size() + v] != 0; }
  bool has_undirected(NodeId u, NodeId v) const { return und_[u * size() + v] != 0; }
  bool adjacent(NodeId u, NodeId v) const { return has_directed(u, v) || has_directed(v, u) || has_undirected(u, v); }

  bool has_directed(std::string_view u, std::string_view v) const { return has_directed(index_of(u), index_of(v)); }
  bool has_undirected(std::string_view u, std::string_view v) const { return has_undirected(index_of(u), index_of(v)); }
  bool adjacent(std::string_view u, std::string_view v) const { return adjacent(index_of(u), index_of(v)); }

  void add_directed(NodeId u, NodeId v) {
    check_free(u, v);
    dir_[u * size() + v] = 1;
  }
  void add_undirected(NodeId u, NodeId v) {
    check_free(u, v);
    und_[u * size() + v] = und_[v * size() + u] = 1;
  }
  void add_directed(std::string_view u, std::string_view v) { add_directed(index_of(u), index_of(v)); }
  void add_undirected(std::string_view u, std::string_view v) { add_undirected(index_of(u), index_of(v)); }

  // Turn the undirected edge u - v into u -> v.
  void orient(NodeId u, NodeId v) {
    if (!has_undirected(u, v)) throw GraphError("no undirected edge " + name(u) + " - " + name(v));
    und_[u * size() + v] = und_[v * size() + u] = 0;
    dir_[u * size() + v] = 1;
  }

  void remove_edge(NodeId u, NodeId v) {
    dir_[u * size() + v] = dir_[v * size() + u] = 0;
    und_[u * size() + v] = und_[v * size() + u] = 0;
  }

  // Would adding u -> v close a cycle through directed arcs?
  bool directed_path(NodeId from, NodeId to) const {
    std::vector<char> seen(size(), 0);
    std::vector<NodeId> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
      const NodeId n = stack.back();
      stack.pop_back();
      if (n == to) return true;
      for (NodeId c = 0; c < size(); ++c)
        if (has_directed(n, c) && !seen[c]) {
          seen[c] = 1;
          stack.push_back(c);
        }
    }
    return false;
  }

  std::vector<std::pair<NodeId, NodeId>> directed_arcs() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    for (NodeId u = 0; u < size(); ++u)
      for (NodeId v = 0; v < size(); ++v)
        if (has_directed(u, v)) out.emplace_back(u, v);
    return out;
  }
  // Each undirected edge once, as (u, v) with u < v.
  std::vector<std::pair<NodeId, NodeId>> undirected_edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    for (NodeId u = 0; u < size(); ++u)
      for (NodeId v = u + 1; v < size(); ++v)
        if (has_undirected(u, v)) out.emplace_back(u, v);
    return out;
  }

  std::size_t edge_count() const { return directed_arcs().size() + undirected_edges().size(); }

  friend bool operator==(const Pdag& a, const Pdag& b) {
    return a.nodes_ == b.nodes_ && a.dir_ == b.dir_ && a.und_ == b.und_;
  }

 private:
  void check_free(NodeId u, NodeId v) const {
    if (u >= size() || v >= size()) throw GraphError("node index out of range");
    if (u == v) throw GraphError("self-loop on '" + name(u) + "'");
    if (adjacent(u, v)) throw GraphError("pair " + name(u) + ", " + name(v) + " already has an edge");
  }

  NodeSet nodes_;
  std::vector<std::uint8_t> dir_;
  std::vector<std::uint8_t> und_;
};

// --- cycles over plain arc sets ---------------------------------------------

// First directed cycle found by a DFS that visits nodes and successors in
// lexicographic order, as the list of its arcs; nullopt when acyclic.
inline std::optional<std::vector<Arc>> find_cycle(const ArcSet& arcs) {
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& a : arcs) {
    succ[a.from].push_back(a.to);
    succ[a.to];
  }
  for (auto& [_, s] : succ) std::sort(s.begin(), s.end());

  std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
  std::vector<std::string> path;
  std::optional<std::vector<Arc>> found;

  std::function<bool(const std::string&)> dfs = [&](const std::string& n) {
    state[n] = 1;
    path.push_back(n);
    for (const auto& c : succ[n]) {
      if (state[c] == 1) {
        std::vector<Arc> cycle;
        auto it = std::find(path.begin(), path.end(), c);
        for (; it + 1 != path.end(); ++it) cycle.push_back({*it, *(it + 1)});
        cycle.push_back({n, c});
        found = std::move(cycle);
        return true;
      }
      if (state[c] == 0 && dfs(c)) return true;
    }
    state[n] = 2;
    path.pop_back();
    return false;
  };
  for (const auto& [n, _] : succ)
    if (state[n] == 0 && dfs(n)) break;
  return found;
}

// --- constraints --------------------------------------------------------------

// Domain knowledge about allowed arcs. Validated on construction: blacklist and
// whitelist are disjoint, the whitelist is acyclic, and no whitelisted arc
// enters a root or leaves a leaf.
class ConstraintSpec {
 public:
  ConstraintSpec() = default;
  ConstraintSpec(ArcSet blacklist, ArcSet whitelist, std::set<std::string> roots = {},
                 std::set<std::string> leaves = {})
      : blacklist_(std::move(blacklist)), whitelist_(std::move(whitelist)), roots_(std::move(roots)),
        leaves_(std::move(leaves)) {
    for (const auto& a : blacklist_)
      if (a.from == a.to) throw GraphError("blacklisted self-loop on '" + a.from + "'");
    for (const auto& a : whitelist_) {
      if (a.from == a.to) throw GraphError("whitelisted self-loop on '" + a.from + "'");
      if (blacklist_.count(a)) throw GraphError("arc " + to_string(a) + " is both blacklisted and whitelisted");
      if (roots_.count(a.to)) throw GraphError("whitelisted arc " + to_string(a) + " enters root '" + a.to + "'");
      if (leaves_.count(a.from)) throw GraphError("whitelisted arc " + to_string(a) + " leaves leaf '" + a.from + "'");
    }
    if (auto cycle = find_cycle(whitelist_)) {
      std::string desc;
      for (const auto& a : *cycle) desc += (desc.empty() ? "" : ", ") + to_string(a);
      throw GraphError("whitelist contains a directed cycle: " + desc);
    }
  }

  const ArcSet& blacklist() const { return blacklist_; }
  const ArcSet& whitelist() const { return whitelist_; }
  const std::set<std::string>& roots() const { return roots_; }
  const std::set<std::string>& leaves() const { return leaves_; }

  bool forbids(const Arc& a) const {
    return blacklist_.count(a) || roots_.count(a.to) || leaves_.count(a.from);
  }
  bool requires_arc(const Arc& a) const { return whitelist_.count(a) > 0; }

  // Same constraints with extra whitelisted arcs.
  ConstraintSpec with_whitelist(const ArcSet& extra) const {
    ArcSet w = whitelist_;
    w.insert(extra.begin(), extra.end());
    return ConstraintSpec(blacklist_, std::move(w), roots_, leaves_);
  }

  void check_nodes(const NodeSet& nodes) const {
    auto check = [&](const std::string& n) {
      if (!nodes.contains(n)) throw GraphError("constraint names unknown node '" + n + "'");
    };
    for (const auto& a : blacklist_) check(a.from), check(a.to);
    for (const auto& a : whitelist_) check(a.from), check(a.to);
    for (const auto& n : roots_) check(n);
    for (const auto& n : leaves_) check(n);
  }

 private:
  ArcSet blacklist_;
  ArcSet whitelist_;
  std::set<std::string> roots_;
  std::set<std::string> leaves_;
};

// Index-level view of a ConstraintSpec for one node ordering. Root and leaf
// designations are expanded into forbidden arcs.
class ConstraintMask {
 public:
  ConstraintMask() = default;
  explicit ConstraintMask(std::size_t n) : n_(n), forbidden_(n * n, 0), required_(n * n, 0) {}

  ConstraintMask(const ConstraintSpec& spec, const NodeSet& nodes) : ConstraintMask(nodes.size()) {
    spec.check_nodes(nodes);
    for (NodeId u = 0; u < n_; ++u)
      for (NodeId v = 0; v < n_; ++v)
        if (u != v && spec.forbids({nodes.name(u), nodes.name(v)})) forbid(u, v);
    for (const auto& a : spec.whitelist()) require(nodes.index_of(a.from), nodes.index_of(a.to));
  }

  std::size_t size() const { return n_; }
  bool forbidden(NodeId u, NodeId v) const { return forbidden_[u * n_ + v] != 0; }
  bool required(NodeId u, NodeId v) const { return required_[u * n_ + v] != 0; }
  bool forbidden_both(NodeId u, NodeId v) const { return forbidden(u, v) && forbidden(v, u); }
  bool required_either(NodeId u, NodeId v) const { return required(u, v) || required(v, u); }

  void forbid(NodeId u, NodeId v) {
    if (!required(u, v)) forbidden_[u * n_ + v] = 1;
  }
  void require(NodeId u, NodeId v) {
    required_[u * n_ + v] = 1;
    forbidden_[u * n_ + v] = 0;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> forbidden_;
  std::vector<std::uint8_t> required_;
};

// --- operations ---------------------------------------------------------------

// Adding u -> v to g would close a directed cycle.
inline bool creates_cycle(const Dag& g, NodeId u, NodeId v) {
  if (u == v) throw GraphError("self-loop on '" + g.name(u) + "'");
  return g.has_path(v, u);
}
inline bool creates_cycle(const Dag& g, const Arc& arc) {
  return creates_cycle(g, g.index_of(arc.from), g.index_of(arc.to));
}

// Kahn's algorithm, always emitting the lexicographically smallest ready node.
inline std::vector<NodeId> topological_order(const Dag& g) {
  const auto n = g.size();
  std::vector<std::size_t> indeg(n, 0);
  for (auto [u, v] : g.index_arcs()) ++indeg[v];
  auto later = [&](NodeId a, NodeId b) { return g.nodes().rank(a) > g.nodes().rank(b); };
  std::priority_queue<NodeId, std::vector<NodeId>, decltype(later)> ready(later);
  for (NodeId v = 0; v < n; ++v)
    if (indeg[v] == 0) ready.push(v);
  std::vector<NodeId> order;
  order.reserve(n);
  while (!ready.empty()) {
    const NodeId u = ready.top();
    ready.pop();
    order.push_back(u);
    for (NodeId v = 0; v < n; ++v)
      if (g.has_arc(u, v) && --indeg[v] == 0) ready.push(v);
  }
  if (order.size() != n) throw GraphError("internal error: cycle in Dag during topological sort");
  return order;
}

inline std::vector<std::string> topological_sort(const Dag& g) {
  std::vector<std::string> out;
  for (auto id : topological_order(g)) out.push_back(g.name(id));
  return out;
}

// Reachability ("Bayes ball") d-separation test.
inline bool d_separated(const Dag& g, NodeId x, NodeId y, const std::vector<NodeId>& z) {
  const auto n = g.size();
  if (x >= n || y >= n) throw GraphError("node index out of range");
  if (x == y) throw GraphError("d-separation requires distinct endpoints");
  std::vector<char> in_z(n, 0);
  for (auto v : z) {
    if (v >= n) throw GraphError("node index out of range");
    if (v == x || v == y) throw GraphError("conditioning set contains an endpoint");
    in_z[v] = 1;
  }

  // Z together with its ancestors: colliders there are open.
  std::vector<char> anc(n, 0);
  std::vector<NodeId> stack(z.begin(), z.end());
  for (auto v : z) anc[v] = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (NodeId p = 0; p < n; ++p)
      if (g.has_arc(p, v) && !anc[p]) {
        anc[p] = 1;
        stack.push_back(p);
      }
  }

  // visited[2 * v + 0]: reached v from a child (moving up),
  // visited[2 * v + 1]: reached v from a parent (moving down).
  std::vector<char> visited(2 * n, 0);
  std::vector<std::pair<NodeId, int>> todo{{x, 0}};
  while (!todo.empty()) {
    auto [v, dir] = todo.back();
    todo.pop_back();
    if (visited[2 * v + dir]) continue;
    visited[2 * v + dir] = 1;
    if (v == y && !in_z[v]) return false;
    if (dir == 0) {
      if (in_z[v]) continue;
      for (NodeId p = 0; p < n; ++p)
        if (g.has_arc(p, v)) todo.emplace_back(p, 0);
      for (NodeId c = 0; c < n; ++c)
        if (g.has_arc(v, c)) todo.emplace_back(c, 1);
    } else {
      if (!in_z[v])
        for (NodeId c = 0; c < n; ++c)
          if (g.has_arc(v, c)) todo.emplace_back(c, 1);
      if (anc[v])
        for (NodeId p = 0; p < n; ++p)
          if (g.has_arc(p, v)) todo.emplace_back(p, 0);
    }
  }
  return true;
}

inline bool d_separated(const Dag& g, std::string_view x, std::string_view y, const std::vector<std::string>& z) {
  std::vector<NodeId> zi;
  for (const auto& s : z) zi.push_back(g.index_of(s));
  std::sort(zi.begin(), zi.end());
  if (std::adjacent_find(zi.begin(), zi.end()) != zi.end()) throw GraphError("duplicate node in conditioning set");
  return d_separated(g, g.index_of(x), g.index_of(y), zi);
}

namespace detail {

// Meek R1-R4: should the undirected edge a - b be oriented a -> b?
inline bool meek_orients(const Pdag& p, NodeId a, NodeId b) {
  const auto n = p.size();
  for (NodeId c = 0; c < n; ++c) {
    if (c == a || c == b) continue;
    // R1: c -> a - b, c and b nonadjacent.
    if (p.has_directed(c, a) && !p.adjacent(c, b)) return true;
    // R2: a -> c -> b.
    if (p.has_directed(a, c) && p.has_directed(c, b)) return true;
  }
  for (NodeId c = 0; c < n; ++c) {
    if (c == a || c == b) continue;
    for (NodeId d = c + 1; d < n; ++d) {
      if (d == a || d == b) continue;
      // R3: a - c -> b, a - d -> b, c and d nonadjacent.
      if (p.has_undirected(a, c) && p.has_undirected(a, d) && p.has_directed(c, b) && p.has_directed(d, b) &&
          !p.adjacent(c, d))
        return true;
    }
  }
  for (NodeId c = 0; c < n; ++c) {
    if (c == a || c == b || !p.has_directed(c, b) || !p.adjacent(a, c)) continue;
    for (NodeId d = 0; d < n; ++d) {
      if (d == a || d == b || d == c) continue;
      // R4: a - d -> c -> b, a adjacent to c, d and b nonadjacent.
      if (p.has_undirected(a, d) && p.has_directed(d, c) && !p.adjacent(d, b)) return true;
    }
  }
  return false;
}

inline std::optional<std::vector<NodeId>> directed_cycle(const Pdag& p) {
  const auto n = p.size();
  std::vector<int> state(n, 0);
  std::vector<NodeId> path;
  std::optional<std::vector<NodeId>> found;
  std::function<bool(NodeId)> dfs = [&](NodeId u) {
    state[u] = 1;
    path.push_back(u);
    for (NodeId v = 0; v < n; ++v) {
      if (!p.has_directed(u, v)) continue;
      if (state[v] == 1) {
        found = std::vector<NodeId>(std::find(path.begin(), path.end(), v), path.end());
        return true;
      }
      if (state[v] == 0 && dfs(v)) return true;
    }
    state[u] = 2;
    path.pop_back();
    return false;
  };
  for (auto u : p.nodes().by_name())
    if (state[u] == 0 && dfs(u)) break;
  return found;
}

}  // namespace detail

// Apply Meek rules R1-R4 to a fixpoint. An orientation that would close a
// directed cycle (possible only on inconsistent input) is skipped.
inline Pdag meek_closure(Pdag p) {
  if (auto cycle = detail::directed_cycle(p)) {
    std::string desc;
    for (auto v : *cycle) desc += p.name(v) + " -> ";
    throw GraphError("PDAG contains a directed cycle: " + desc + p.name(cycle->front()));
  }
  const auto order = p.nodes().by_name();
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto a : order)
      for (auto b : order) {
        if (!p.has_undirected(a, b)) continue;
        if (detail::meek_orients(p, a, b) && !p.directed_path(b, a)) {
          p.orient(a, b);
          changed = true;
        }
      }
  }
  return p;
}

// Dor-Tarsi extension: repeatedly peel a sink whose undirected neighbours are
// adjacent to all of its other neighbours. Among eligible sinks the one with
// the largest name is peeled first, so A - B becomes A -> B.
inline Dag extend_to_dag(const Pdag& p) {
  const auto n = p.size();
  if (auto cycle = detail::directed_cycle(p)) {
    std::vector<std::string> witness;
    for (auto v : *cycle) witness.push_back(p.name(v));
    throw NotExtendableError("PDAG directed arcs already form a cycle", witness);
  }
  Dag out(p.names());
  for (auto [u, v] : p.directed_arcs()) out.add_arc(u, v);

  std::vector<char> alive(n, 1);
  auto order = p.nodes().by_name();
  std::reverse(order.begin(), order.end());
  for (std::size_t remaining = n; remaining > 0; --remaining) {
    std::optional<NodeId> sink;
    for (auto x : order) {
      if (!alive[x]) continue;
      bool ok = true;
      for (NodeId y = 0; y < n && ok; ++y)
        if (alive[y] && p.has_directed(x, y)) ok = false;
      for (NodeId y = 0; y < n && ok; ++y) {
        if (!alive[y] || !p.has_undirected(x, y)) continue;
        for (NodeId w = 0; w < n && ok; ++w)
          if (w != y && alive[w] && p.adjacent(x, w) && !p.adjacent(y, w)) ok = false;
      }
      if (ok) {
        sink = x;
        break;
      }
    }
    if (!sink) {
      // Witness: a cycle in the skeleton of what is left.
      std::vector<std::string> witness;
      std::vector<int> parent(n, -1), state(n, 0);
      std::function<bool(NodeId, int)> dfs = [&](NodeId u, int from) {
        state[u] = 1;
        for (NodeId v = 0; v < n; ++v) {
          if (!alive[v] || v == u || !p.adjacent(u, v) || static_cast<int>(v) == from) continue;
          if (state[v] == 1) {
            for (NodeId w = u; w != v; w = static_cast<NodeId>(parent[w])) witness.push_back(p.name(w));
            witness.push_back(p.name(v));
            std::reverse(witness.begin(), witness.end());
            return true;
          }
          if (state[v] == 0) {
            parent[v] = static_cast<int>(u);
            if (dfs(v, static_cast<int>(u))) return true;
          }
        }
        state[u] = 2;
        return false;
      };
      for (NodeId u = 0; u < n && witness.empty(); ++u)
        if (alive[u] && state[u] == 0) dfs(u, -1);
      if (witness.empty())
        for (NodeId u = 0; u < n; ++u)
          if (alive[u]) witness.push_back(p.name(u));
      throw NotExtendableError("PDAG admits no consistent DAG extension", witness);
    }
    for (NodeId y = 0; y < n; ++y)
      if (alive[y] && p.has_undirected(*sink, y)) out.add_arc(y, *sink);
    alive[*sink] = 0;
  }
  return out;
}

// Structural Hamming distance: one edit per node pair whose connection differs
// (missing, extra, or reversed).
inline std::size_t shd(const Dag& g1, const Dag& g2) {
  if (g1.names() != g2.names()) throw GraphError("shd requires graphs over the same nodes");
  std::size_t d = 0;
  for (NodeId u = 0; u < g1.size(); ++u)
    for (NodeId v = u + 1; v < g1.size(); ++v) {
      const int s1 = g1.has_arc(u, v) ? 1 : g1.has_arc(v, u) ? 2 : 0;
      const int s2 = g2.has_arc(u, v) ? 1 : g2.has_arc(v, u) ? 2 : 0;
      d += s1 != s2;
    }
  return d;
}

// Completed PDAG of g's Markov equivalence class: skeleton and v-structures,
// closed under the Meek rules.
inline Pdag cpdag(const Dag& g) {
  Pdag p(g.names());
  const auto n = g.size();
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (g.adjacent(u, v)) p.add_undirected(u, v);
  for (NodeId c = 0; c < n; ++c) {
    auto pa = g.parents(c);
    for (std::size_t i = 0; i < pa.size(); ++i)
      for (std::size_t j = i + 1; j < pa.size(); ++j)
        if (!g.adjacent(pa[i], pa[j])) {
          if (p.has_undirected(pa[i], c)) p.orient(pa[i], c);
          if (p.has_undirected(pa[j], c)) p.orient(pa[j], c);
        }
  }
  return meek_closure(std::move(p));
}

}  // namespace bamani
