#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bamani/dataset.hpp"
#include "bamani/graph.hpp"
#include "bamani/learners/learn.hpp"
#include "bamani/log.hpp"
#include "bamani/parallel.hpp"
#include "bamani/rng.hpp"
#include "bamani/stats.hpp"

namespace bamani {

// How often each directed arc appeared across bootstrap replicates.
class ArcFrequencyTable {
 public:
  ArcFrequencyTable() = default;
  explicit ArcFrequencyTable(std::vector<std::string> names)
      : nodes_(std::move(names)), counts_(nodes_.size() * nodes_.size(), 0) {}

  void add(const Dag& g) {
    for (auto [u, v] : g.index_arcs()) ++counts_[u * nodes_.size() + v];
    ++replicates_;
  }

  const NodeSet& nodes() const { return nodes_; }
  std::size_t replicate_count() const { return replicates_; }
  std::size_t count(NodeId u, NodeId v) const { return counts_[u * nodes_.size() + v]; }

  double frequency(NodeId u, NodeId v) const {
    return replicates_ == 0 ? 0.0 : static_cast<double>(count(u, v)) / static_cast<double>(replicates_);
  }
  double frequency(const Arc& a) const { return frequency(nodes_.index_of(a.from), nodes_.index_of(a.to)); }

  // Frequencies of every ordered pair u != v, in arc order.
  std::vector<std::pair<Arc, double>> entries() const {
    std::vector<std::pair<Arc, double>> out;
    for (NodeId u = 0; u < nodes_.size(); ++u)
      for (NodeId v = 0; v < nodes_.size(); ++v)
        if (u != v) out.push_back({{nodes_.name(u), nodes_.name(v)}, frequency(u, v)});
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<double> frequencies() const {
    std::vector<double> out;
    for (const auto& e : entries()) out.push_back(e.second);
    return out;
  }

  friend bool operator==(const ArcFrequencyTable& a, const ArcFrequencyTable& b) {
    return a.nodes_ == b.nodes_ && a.counts_ == b.counts_ && a.replicates_ == b.replicates_;
  }

 private:
  NodeSet nodes_;
  std::vector<std::size_t> counts_;
  std::size_t replicates_ = 0;
};

// Automatic inclusion threshold for averaged networks. The empirical CDF F of
// the arc frequencies is matched in L1 distance on [0, 1] by the ideal CDF of
// a table whose arcs all have frequency 0 or 1 (F is flat at level t between
// the two). The optimal level t* is the length-weighted median of F's values
// over [0, 1); the cut is F's t*-quantile q, and arcs strictly above q are
// significant. The returned threshold is the midpoint between q and the next
// observed frequency, so "frequency >= threshold" selects the same arcs.
inline double significance_threshold(std::vector<double> freqs) {
  if (freqs.empty()) throw DataError("significance_threshold: empty frequency table");
  std::sort(freqs.begin(), freqs.end());
  if (freqs.front() == freqs.back()) return 0.5;
  const double m = static_cast<double>(freqs.size());

  // Step pieces of F on [0, 1): (level, length).
  std::vector<double> knots;
  for (double f : freqs)
    if (knots.empty() || f != knots.back()) knots.push_back(f);
  auto cdf = [&](double x) {
    return static_cast<double>(std::upper_bound(freqs.begin(), freqs.end(), x) - freqs.begin()) / m;
  };
  std::vector<std::pair<double, double>> pieces;
  if (knots.front() > 0.0) pieces.emplace_back(0.0, knots.front());
  for (std::size_t k = 0; k < knots.size(); ++k) {
    const double lo = knots[k];
    const double hi = k + 1 < knots.size() ? knots[k + 1] : 1.0;
    if (hi > lo) pieces.emplace_back(cdf(lo), hi - lo);
  }
  std::sort(pieces.begin(), pieces.end());

  double level = pieces.back().first;
  double acc = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    acc += pieces[i].second;
    if (std::abs(acc - 0.5) <= 1e-12 && i + 1 < pieces.size()) {
      level = 0.5 * (pieces[i].first + pieces[i + 1].first);
      break;
    }
    if (acc > 0.5) {
      level = pieces[i].first;
      break;
    }
  }

  // Type-1 quantile: smallest observed frequency whose CDF reaches `level`.
  double cut = freqs.back();
  for (double f : knots)
    if (cdf(f) >= level - 1e-12) {
      cut = f;
      break;
    }
  auto above = std::upper_bound(knots.begin(), knots.end(), cut);
  const double next = above == knots.end() ? 1.0 : *above;
  if (above == knots.end() && cut >= 1.0) return 1.0;
  return 0.5 * (cut + next);
}

inline double significance_threshold(const ArcFrequencyTable& table) {
  if (table.replicate_count() == 0 || table.nodes().size() < 2)
    throw DataError("significance_threshold: empty frequency table");
  return significance_threshold(table.frequencies());
}

struct BootstrapResult {
  AlgorithmId algorithm = AlgorithmId::HC;
  ArcFrequencyTable table;
  double threshold = 0.5;
  Dag averaged;
  std::size_t failed_replicates = 0;
  std::vector<Arc> cycle_repairs;  // arcs dropped to make the average acyclic
};

// Keep arcs with frequency >= threshold, then break cycles by dropping the
// least frequent non-whitelisted arc of each cycle found.
inline Dag averaged_network(const ArcFrequencyTable& table, double threshold, const ConstraintMask& mask,
                            std::vector<Arc>* repairs = nullptr) {
  const auto& nodes = table.nodes();
  ArcSet arcs;
  for (NodeId u = 0; u < nodes.size(); ++u)
    for (NodeId v = 0; v < nodes.size(); ++v) {
      if (u == v) continue;
      const double f = table.frequency(u, v);
      if ((f > 0.0 && f >= threshold) || mask.required(u, v)) arcs.insert({nodes.name(u), nodes.name(v)});
    }
  while (auto cycle = find_cycle(arcs)) {
    std::optional<Arc> weakest;
    double weakest_f = 2.0;
    for (const auto& a : *cycle) {
      if (mask.required(nodes.index_of(a.from), nodes.index_of(a.to))) continue;
      const double f = table.frequency(a);
      if (f < weakest_f || (f == weakest_f && a < *weakest)) weakest_f = f, weakest = a;
    }
    arcs.erase(*weakest);
    if (repairs) repairs->push_back(*weakest);
  }
  return Dag(nodes.names(), std::vector<Arc>(arcs.begin(), arcs.end()));
}

struct BootstrapOptions {
  std::size_t replicates = 500;
  std::uint64_t seed = 0;
  std::optional<double> threshold;  // nullopt: automatic
  std::size_t workers = 1;
};

// Learn `alg` on `replicates` bootstrap resamples (replicate r uses seed
// derive_seed(seed, r)) and average. Failed replicates are skipped; more than
// 1% failures aborts.
inline BootstrapResult bootstrap_average(AlgorithmId alg, const Dataset& d, const ConstraintSpec& constraints,
                                         const LearnerConfig& cfg, const BootstrapOptions& opt) {
  if (opt.replicates == 0) throw ConfigError("replicates", "must be at least 1");
  const ConstraintMask mask(constraints, NodeSet(d.names()));
  std::vector<std::optional<Dag>> learned(opt.replicates);
  std::vector<std::string> errors(opt.replicates);
  parallel_for(opt.replicates, opt.workers, [&](std::size_t r) {
    const auto rep_seed = derive_seed(opt.seed, r);
    try {
      LearnerConfig c = cfg;
      c.seed = derive_seed(rep_seed, 1);
      learned[r] = learn(alg, bootstrap_resample(d, rep_seed), mask, c);
    } catch (const std::exception& e) {
      errors[r] = e.what();
    }
  });

  BootstrapResult out;
  out.algorithm = alg;
  out.table = ArcFrequencyTable(d.names());
  for (std::size_t r = 0; r < opt.replicates; ++r) {
    if (learned[r])
      out.table.add(*learned[r]);
    else
      ++out.failed_replicates;
  }
  if (out.failed_replicates > 0) {
    std::string first;
    for (const auto& e : errors)
      if (!e.empty()) {
        first = e;
        break;
      }
    if (static_cast<double>(out.failed_replicates) > 0.01 * static_cast<double>(opt.replicates))
      throw Error(to_string(alg) + ": " + std::to_string(out.failed_replicates) + " of " +
                  std::to_string(opt.replicates) + " bootstrap replicates failed; first error: " + first);
    warn(to_string(alg) + ": " + std::to_string(out.failed_replicates) + " bootstrap replicates failed: " + first);
  }
  out.threshold = opt.threshold ? *opt.threshold : significance_threshold(out.table);
  out.averaged = averaged_network(out.table, out.threshold, mask, &out.cycle_repairs);
  return out;
}

inline BootstrapResult bootstrap_average(AlgorithmId alg, const Dataset& d, const ConstraintSpec& constraints,
                                         const LearnerConfig& cfg, std::size_t replicates, std::uint64_t seed) {
  BootstrapOptions opt;
  opt.replicates = replicates;
  opt.seed = seed;
  return bootstrap_average(alg, d, constraints, cfg, opt);
}

using ArcStrengths = std::map<Arc, double>;

// p-value of u as a parent of v given v's other parents, on `d`. Arcs whose
// test cannot be evaluated get strength 1 with a warning. With `log_out` the
// natural log of each p-value is stored too; it keeps strong arcs apart when
// their p-values underflow to 0.
inline ArcStrengths arc_strengths(const Dag& g, const Dataset& d, ArcStrengths* log_out = nullptr) {
  const auto corr = correlation_matrix(d, true);
  ArcStrengths out;
  for (auto [gu, gv] : g.index_arcs()) {
    const Arc arc{g.name(gu), g.name(gv)};
    const NodeId u = d.index_of(arc.from), v = d.index_of(arc.to);
    std::vector<NodeId> z;
    for (auto p : g.parents(gv))
      if (p != gu) z.push_back(d.index_of(g.name(p)));
    std::sort(z.begin(), z.end());
    try {
      const auto t = ci_test(corr, d.n_obs(), u, v, z);
      out[arc] = t.p_value;
      if (log_out) (*log_out)[arc] = t.log_p_value;
    } catch (const DegenerateTestError& e) {
      warn("arc strength " + to_string(arc) + ": " + e.what() + "; strength set to 1");
      out[arc] = 1.0;
      if (log_out) (*log_out)[arc] = 0.0;
    }
  }
  return out;
}

struct PoolRecord {
  std::string from;
  std::string to;
  AlgorithmId algorithm;
  double strength;
  double log_strength = std::numeric_limits<double>::quiet_NaN();  // NaN: log(strength)

  Arc arc() const { return {from, to}; }
};

// Arcs contributed by every ensemble member, one record per (algorithm, arc).
class ArcPool {
 public:
  void add(PoolRecord r) {
    if (!(r.strength >= 0.0 && r.strength <= 1.0)) throw DataError("arc strength outside [0, 1] for " + r.from + "->" + r.to);
    if (std::isnan(r.log_strength)) r.log_strength = std::log(r.strength);
    if (!(r.log_strength <= 0.0)) throw DataError("log strength above 0 for " + r.from + "->" + r.to);
    for (const auto& x : records_)
      if (x.algorithm == r.algorithm && x.from == r.from && x.to == r.to)
        throw DataError("duplicate pool record " + to_string(r.algorithm) + " " + r.from + "->" + r.to);
    records_.push_back(std::move(r));
  }

  const std::vector<PoolRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  double min_strength() const {
    if (empty()) throw DataError("empty arc pool");
    double m = 1.0;
    for (const auto& r : records_) m = std::min(m, r.strength);
    return m;
  }
  double max_strength() const {
    if (empty()) throw DataError("empty arc pool");
    double m = 0.0;
    for (const auto& r : records_) m = std::max(m, r.strength);
    return m;
  }
  // Smallest strength recorded for `a` by any algorithm.
  std::optional<double> best_strength(const Arc& a) const {
    std::optional<double> best;
    for (const auto& r : records_)
      if (r.from == a.from && r.to == a.to && (!best || r.strength < *best)) best = r.strength;
    return best;
  }
  // Same on the log scale, which still orders p-values that underflowed.
  std::optional<double> best_log_strength(const Arc& a) const {
    std::optional<double> best;
    for (const auto& r : records_)
      if (r.from == a.from && r.to == a.to && (!best || r.log_strength < *best)) best = r.log_strength;
    return best;
  }

 private:
  std::vector<PoolRecord> records_;
};

struct AlgorithmNetwork {
  AlgorithmId algorithm;
  Dag dag;
  ArcStrengths strengths;
  ArcStrengths log_strengths = {};  // optional; missing arcs use log(strength)
};

inline AlgorithmNetwork member_network(AlgorithmId alg, const Dag& g, const Dataset& d) {
  AlgorithmNetwork m{alg, g, {}, {}};
  m.strengths = arc_strengths(g, d, &m.log_strengths);
  return m;
}

inline ArcPool build_pool(const std::vector<AlgorithmNetwork>& members) {
  ArcPool pool;
  for (const auto& m : members) {
    if (!members.empty() && m.dag.names() != members.front().dag.names())
      throw DataError("build_pool: " + to_string(m.algorithm) + " network has a different feature set");
    for (const auto& arc : m.dag.arcs()) {
      auto it = m.strengths.find(arc);
      if (it == m.strengths.end()) throw DataError("build_pool: missing strength for " + to_string(arc));
      auto lg = m.log_strengths.find(arc);
      pool.add({arc.from, arc.to, m.algorithm, it->second,
                lg == m.log_strengths.end() ? std::numeric_limits<double>::quiet_NaN() : lg->second});
    }
  }
  return pool;
}

}  // namespace bamani
