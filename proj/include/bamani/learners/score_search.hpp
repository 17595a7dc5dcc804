#pragma once

#include <deque>
#include <limits>
#include <optional>
#include <vector>

#include "bamani/learners/common.hpp"

namespace bamani {

struct SearchResult {
  Dag dag;
  double score = 0.0;
  // Score after every accepted move (hill climbing) or best-so-far score
  // after every move (tabu); element 0 is the starting score.
  std::vector<double> trace;
  std::size_t iterations = 0;
};

namespace detail {

enum class MoveKind { Add, Delete, Reverse };

struct Move {
  MoveKind kind;
  NodeId from;
  NodeId to;
  friend bool operator==(const Move&, const Move&) = default;
};

// Greedy single-arc search over {add, delete, reverse} with decomposable
// Gaussian BIC. With `tabu_length` > 0 the best admissible move is taken even
// when it does not improve; moves that undo one of the last `tabu_length`
// changes are barred unless they beat the best score seen (aspiration), and
// the search stops after `tabu_length` moves without a new best.
class ScoreSearch {
 public:
  ScoreSearch(const Dataset& d, const ConstraintMask& mask, const LearnerConfig& cfg, std::size_t tabu_length)
      : scorer_(d), mask_(mask), cfg_(cfg), tabu_length_(tabu_length), dag_(d.names()) {}

  SearchResult run() {
    const auto n = dag_.size();
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = 0; v < n; ++v)
        if (mask_.required(u, v)) dag_.add_arc(u, v);
    node_score_.resize(n);
    for (NodeId v = 0; v < n; ++v) node_score_[v] = scorer_.node_score(v, dag_.parents(v));
    double current = total();
    SearchResult best{dag_, current, {current}, 0};
    std::deque<Move> tabu;
    std::size_t stale = 0;

    for (std::size_t it = 0; it < cfg_.max_iterations; ++it) {
      std::optional<Move> chosen;
      double chosen_delta = -std::numeric_limits<double>::infinity();
      for (NodeId u = 0; u < n; ++u)
        for (NodeId v = 0; v < n; ++v) {
          if (u == v) continue;
          for (auto kind : {MoveKind::Add, MoveKind::Delete, MoveKind::Reverse}) {
            const Move m{kind, u, v};
            if (!legal(m)) continue;
            const double delta = score_delta(m);
            if (!(delta > chosen_delta)) continue;
            if (tabu_length_ == 0) {
              if (!(delta > kEps)) continue;
            } else if (std::find(tabu.begin(), tabu.end(), m) != tabu.end() && !(current + delta > best.score + kEps)) {
              continue;
            }
            chosen = m;
            chosen_delta = delta;
          }
        }
      if (!chosen || !std::isfinite(chosen_delta)) break;
      apply(*chosen);
      current += chosen_delta;
      best.iterations = it + 1;
      if (tabu_length_ == 0) {
        best.dag = dag_;
        best.score = current;
        best.trace.push_back(current);
        continue;
      }
      tabu.push_back(inverse(*chosen));
      if (tabu.size() > tabu_length_) tabu.pop_front();
      if (current > best.score + kEps) {
        best.dag = dag_;
        best.score = current;
        stale = 0;
      } else if (++stale >= tabu_length_) {
        best.trace.push_back(best.score);
        break;
      }
      best.trace.push_back(best.score);
    }
    return best;
  }

 private:
  static constexpr double kEps = 1e-9;

  double total() const {
    double s = 0.0;
    for (double x : node_score_) s += x;
    return s;
  }

  static Move inverse(const Move& m) {
    switch (m.kind) {
      case MoveKind::Add: return {MoveKind::Delete, m.from, m.to};
      case MoveKind::Delete: return {MoveKind::Add, m.from, m.to};
      case MoveKind::Reverse: return {MoveKind::Reverse, m.to, m.from};
    }
    return m;
  }

  bool legal(const Move& m) const {
    const auto u = m.from, v = m.to;
    switch (m.kind) {
      case MoveKind::Add:
        return !dag_.adjacent(u, v) && !mask_.forbidden(u, v) && !dag_.has_path(v, u);
      case MoveKind::Delete:
        return dag_.has_arc(u, v) && !mask_.required(u, v);
      case MoveKind::Reverse: {
        if (!dag_.has_arc(u, v) || mask_.required(u, v) || mask_.forbidden(v, u)) return false;
        Dag tmp = dag_;
        tmp.remove_arc(u, v);
        return !tmp.has_path(u, v);
      }
    }
    return false;
  }

  std::vector<NodeId> parents_with(NodeId v, NodeId add) const {
    auto pa = dag_.parents(v);
    pa.insert(std::upper_bound(pa.begin(), pa.end(), add), add);
    return pa;
  }
  std::vector<NodeId> parents_without(NodeId v, NodeId drop) const {
    auto pa = dag_.parents(v);
    std::erase(pa, drop);
    return pa;
  }

  double score_delta(const Move& m) {
    const auto u = m.from, v = m.to;
    switch (m.kind) {
      case MoveKind::Add: return scorer_.node_score(v, parents_with(v, u)) - node_score_[v];
      case MoveKind::Delete: return scorer_.node_score(v, parents_without(v, u)) - node_score_[v];
      case MoveKind::Reverse:
        return scorer_.node_score(v, parents_without(v, u)) - node_score_[v] +
               scorer_.node_score(u, parents_with(u, v)) - node_score_[u];
    }
    return 0.0;
  }

  void apply(const Move& m) {
    const auto u = m.from, v = m.to;
    switch (m.kind) {
      case MoveKind::Add: dag_.add_arc(u, v); break;
      case MoveKind::Delete: dag_.remove_arc(u, v); break;
      case MoveKind::Reverse:
        dag_.remove_arc(u, v);
        dag_.add_arc(v, u);
        break;
    }
    node_score_[u] = scorer_.node_score(u, dag_.parents(u));
    node_score_[v] = scorer_.node_score(v, dag_.parents(v));
  }

  GaussianBicScorer scorer_;
  const ConstraintMask& mask_;
  const LearnerConfig& cfg_;
  std::size_t tabu_length_;
  Dag dag_;
  std::vector<double> node_score_;
};

}  // namespace detail

inline SearchResult hill_climb_search(const Dataset& d, const ConstraintMask& mask, const LearnerConfig& cfg) {
  cfg.validate();
  return detail::ScoreSearch(d, mask, cfg, 0).run();
}

inline SearchResult tabu_search_run(const Dataset& d, const ConstraintMask& mask, const LearnerConfig& cfg) {
  cfg.validate();
  if (cfg.tabu_length == 0) throw ConfigError("tabu_length", "must be at least 1 for tabu search");
  return detail::ScoreSearch(d, mask, cfg, cfg.tabu_length).run();
}

inline Dag hill_climb(const Dataset& d, const LearnerConfig& cfg, const ConstraintSpec& constraints = {}) {
  return hill_climb_search(d, ConstraintMask(constraints, NodeSet(d.names())), cfg).dag;
}

inline Dag tabu_search(const Dataset& d, const LearnerConfig& cfg, const ConstraintSpec& constraints = {}) {
  return tabu_search_run(d, ConstraintMask(constraints, NodeSet(d.names())), cfg).dag;
}

}  // namespace bamani
