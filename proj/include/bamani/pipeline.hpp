#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bamani/ensemble.hpp"
#include "bamani/network.hpp"

namespace bamani {

// User-supplied domain knowledge before expansion into arcs.
struct DomainKnowledge {
  ArcSet blacklist;
  ArcSet whitelist;
  std::set<std::string> roots;
  std::set<std::string> leaves;
  bool auto_leaves = false;
};

// Roots lose every incoming arc and leaves every outgoing arc; with
// auto_leaves, features whose zero fraction exceeds the threshold are leaves.
inline ConstraintSpec build_blacklist(const Dataset& d, const DomainKnowledge& k, double leaf_zero_threshold = 0.5) {
  const NodeSet nodes(d.names());
  auto leaves = k.leaves;
  if (k.auto_leaves)
    for (const auto& f : d.names())
      if (zero_fraction(d, f) > leaf_zero_threshold) leaves.insert(f);
  ConstraintSpec(k.blacklist, k.whitelist, k.roots, leaves).check_nodes(nodes);

  ArcSet black = k.blacklist;
  for (const auto& r : k.roots)
    for (const auto& u : d.names())
      if (u != r) black.insert({u, r});
  for (const auto& l : leaves)
    for (const auto& v : d.names())
      if (v != l) black.insert({l, v});
  for (const auto& a : k.whitelist)
    if (black.count(a)) {
      const bool user = k.blacklist.count(a) > 0;
      throw GraphError("whitelisted arc " + to_string(a) + " conflicts with the blacklist (" +
                       (user ? std::string("listed explicitly") :
                        k.roots.count(a.to) ? "'" + a.to + "' is a root" : "'" + a.from + "' is a leaf") + ")");
    }
  return ConstraintSpec(std::move(black), k.whitelist, k.roots, std::move(leaves));
}

struct QuantileGrid {
  std::size_t n = 2;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> thresholds;  // Q_1 .. Q_{n-1}
};

inline QuantileGrid quantile_grid(double lo, double hi, std::size_t n) {
  if (n < 2) throw ConfigError("quantiles", "must be at least 2");
  QuantileGrid g{n, lo, hi, {}};
  for (std::size_t j = 1; j < n; ++j)
    g.thresholds.push_back(lo + static_cast<double>(j) * (hi - lo) / static_cast<double>(n));
  return g;
}

inline QuantileGrid quantile_grid(const ArcPool& pool, std::size_t n) {
  if (pool.empty()) throw DataError("quantile_grid: empty arc pool");
  const double lo = pool.min_strength(), hi = pool.max_strength();
  if (lo == hi) warn("all pooled arc strengths equal " + format_double(lo) + "; the quantile sweep has a single category");
  return quantile_grid(lo, hi, n);
}

// Pooled arcs with some record below q. Of two opposite qualifying arcs only
// the one with the smaller minimum strength stays (ties: lexicographically
// smaller arc).
inline ArcSet whitelist_candidates(const ArcPool& pool, double q) {
  std::map<Arc, double> best;  // minimum log strength
  for (const auto& r : pool.records())
    if (r.strength < q) {
      auto [it, fresh] = best.try_emplace(r.arc(), r.log_strength);
      if (!fresh) it->second = std::min(it->second, r.log_strength);
    }
  ArcSet out;
  for (const auto& [a, s] : best) {
    auto rev = best.find({a.to, a.from});
    if (rev != best.end() && (rev->second < s || (rev->second == s && rev->first < a))) continue;
    out.insert(a);
  }
  return out;
}

struct BamaniBic {
  std::size_t n_parents = 0;
  double l1 = 0.0;
  double value = 0.0;
};

// |parents| log10(n) + sum of absolute OLS residuals.
inline BamaniBic bamani_bic(const Dataset& d, std::string_view k, const std::vector<std::string>& parents) {
  for (const auto& p : parents)
    if (p == k) throw DataError("bamani_bic: '" + std::string(k) + "' listed as its own parent");
  const auto r = detail::ols(d, d.index_of(k), detail::resolve(d, parents));
  BamaniBic out;
  out.n_parents = parents.size();
  out.l1 = r.residuals.lpNorm<1>();
  out.value = static_cast<double>(parents.size()) * std::log10(static_cast<double>(d.n_obs())) + out.l1;
  return out;
}

// Break cycles by removing, from each cycle found, the arc with the weakest
// pooled evidence (largest minimum strength; arcs absent from the pool count
// as strength 1). Protected arcs are never removed.
struct CycleResolution {
  ArcSet arcs;
  std::vector<Arc> removed;
};

inline CycleResolution resolve_cycles(ArcSet arcs, const ArcPool& pool, const ArcSet& protect = {}) {
  CycleResolution out;
  while (auto cycle = find_cycle(arcs)) {
    std::optional<Arc> weakest;
    double weakest_s = -std::numeric_limits<double>::infinity();
    for (const auto& a : *cycle) {
      if (protect.count(a)) continue;
      const double s = pool.best_log_strength(a).value_or(0.0);
      if (!weakest || s > weakest_s || (s == weakest_s && a < *weakest)) weakest_s = s, weakest = a;
    }
    if (!weakest) throw GraphError("cycle made only of protected arcs");
    warn("removing " + to_string(*weakest) + " (strength " + format_double(pool.best_strength(*weakest).value_or(1.0)) + ") to break a cycle");
    arcs.erase(*weakest);
    out.removed.push_back(*weakest);
  }
  out.arcs = std::move(arcs);
  return out;
}

// One threshold of the whitelist sweep.
struct SweepStep {
  std::size_t j = 0;
  double threshold = 0.0;
  ArcSet candidates;             // W_temp(Q_j) as filtered from the pool
  ArcSet applied;                // after blacklist conflicts and cycles are removed
  std::vector<Arc> dropped;      // blacklisted candidates
  std::vector<Arc> cycle_breaks;
  Dag learned;
};

struct BicRow {
  std::string feature;
  std::size_t j = 0;
  double threshold = 0.0;
  std::size_t n_parents = 0;
  double l1 = 0.0;
  double bic = 0.0;
};

struct FeatureChoice {
  std::string feature;
  std::size_t j = 0;
  std::vector<std::string> parents;
  double bic = 0.0;
};

struct ParentSelection {
  std::vector<FeatureChoice> features;  // in dataset column order
  std::vector<BicRow> table;            // feature-major, j ascending
  ArcSet arcs;                          // union of chosen parent arcs
  std::vector<SweepStep> steps;
};

// Learn G'_j under the blacklist plus W_temp(Q_j) for every j.
inline std::vector<SweepStep> sweep(const Dataset& d, const ArcPool& pool, const ConstraintSpec& constraints,
                                    const QuantileGrid& grid, AlgorithmId reference, const LearnerConfig& cfg,
                                    std::size_t workers = 1) {
  if (!is_top_level(reference)) throw ConfigError("reference", to_string(reference) + " is not a structure learner");
  std::vector<SweepStep> steps(grid.thresholds.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    auto& s = steps[i];
    s.j = i + 1;
    s.threshold = grid.thresholds[i];
    s.candidates = whitelist_candidates(pool, s.threshold);
    ArcSet w = constraints.whitelist();
    for (const auto& a : s.candidates) {
      if (w.count(a)) continue;
      if (constraints.forbids(a) || constraints.requires_arc({a.to, a.from})) {
        warn("Q_" + std::to_string(s.j) + ": candidate " + to_string(a) + " conflicts with the constraints and is dropped");
        s.dropped.push_back(a);
        continue;
      }
      w.insert(a);
    }
    auto resolved = resolve_cycles(std::move(w), pool, constraints.whitelist());
    s.applied = std::move(resolved.arcs);
    s.cycle_breaks = std::move(resolved.removed);
  }
  parallel_for(steps.size(), workers, [&](std::size_t i) {
    steps[i].learned = learn(reference, d, constraints.with_whitelist(steps[i].applied), cfg);
  });
  return steps;
}

inline ParentSelection select_parents(const Dataset& d, std::vector<SweepStep> steps) {
  ParentSelection out;
  for (const auto& f : d.names()) {
    std::optional<FeatureChoice> best;
    for (const auto& s : steps) {
      auto parents = s.learned.parent_names(s.learned.index_of(f));
      std::sort(parents.begin(), parents.end());
      BicRow row{f, s.j, s.threshold, parents.size(), 0.0, 0.0};
      try {
        const auto b = bamani_bic(d, f, parents);
        row.l1 = b.l1;
        row.bic = b.value;
      } catch (const SingularDesignError& e) {
        warn("BIC for '" + f + "' at Q_" + std::to_string(s.j) + ": " + e.what());
        row.l1 = row.bic = std::numeric_limits<double>::infinity();
      }
      out.table.push_back(row);
      if (!best || row.bic < best->bic) best = FeatureChoice{f, s.j, parents, row.bic};
    }
    if (!best) continue;
    for (const auto& p : best->parents) out.arcs.insert({p, f});
    out.features.push_back(std::move(*best));
  }
  out.steps = std::move(steps);
  return out;
}

inline ParentSelection sweep_and_select(const Dataset& d, const ArcPool& pool, const ConstraintSpec& constraints,
                                        const QuantileGrid& grid, AlgorithmId reference, const LearnerConfig& cfg,
                                        std::size_t workers = 1) {
  return select_parents(d, sweep(d, pool, constraints, grid, reference, cfg, workers));
}

struct PipelineConfig {
  DomainKnowledge knowledge;
  double leaf_zero_threshold = 0.5;
  std::vector<AlgorithmId> roster{std::begin(kTopLevelAlgorithms), std::end(kTopLevelAlgorithms)};
  std::size_t replicates = 500;
  std::optional<double> averaging_threshold;  // nullopt: automatic
  std::size_t quantiles = 10;
  AlgorithmId reference = AlgorithmId::TABU;
  LearnerConfig learner;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const {
    if (roster.empty()) throw ConfigError("algorithms", "roster is empty");
    for (auto a : roster)
      if (!is_top_level(a)) throw ConfigError("algorithms", to_string(a) + " is not a structure learner");
    for (std::size_t i = 0; i < roster.size(); ++i)
      for (std::size_t j = i + 1; j < roster.size(); ++j)
        if (roster[i] == roster[j]) throw ConfigError("algorithms", "duplicate entry " + to_string(roster[i]));
    if (replicates == 0) throw ConfigError("replicates", "must be at least 1");
    if (averaging_threshold && !(*averaging_threshold >= 0.0 && *averaging_threshold <= 1.0))
      throw ConfigError("threshold", "must lie in [0, 1]");
    if (quantiles < 2) throw ConfigError("quantiles", "must be at least 2");
    if (!is_top_level(reference)) throw ConfigError("reference", to_string(reference) + " is not a structure learner");
    if (!(leaf_zero_threshold >= 0.0 && leaf_zero_threshold <= 1.0))
      throw ConfigError("leaf_zero_threshold", "must lie in [0, 1]");
    learner.validate();
  }
};

struct BamaniResult {
  ConstraintSpec constraints;
  std::vector<BootstrapResult> bootstraps;  // roster order
  std::vector<AlgorithmNetwork> members;    // averaged networks with strengths
  ArcPool pool;
  std::optional<QuantileGrid> grid;         // absent when the pool is empty
  ParentSelection selection;
  CycleResolution whitelist;
  FittedNetwork network;
  ArcStrengths strengths;                   // of the final network
  ArcStrengths log_strengths;
  std::string completed_stage;              // last stage that finished
};

// Called after each stage with the partial result and the stage name.
using StageCallback = std::function<void(const BamaniResult&, const std::string&)>;

inline std::uint64_t algorithm_stream(AlgorithmId a) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : to_string(a)) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  return h;
}

namespace detail {

template <typename F>
void run_stage(const std::string& stage, BamaniResult& r, const StageCallback& cb, F&& f) {
  try {
    f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
  r.completed_stage = stage;
  if (cb) cb(r, stage);
}

}  // namespace detail

// The full four-step procedure.
inline BamaniResult run_bamani(const Dataset& d, const PipelineConfig& cfg, const StageCallback& cb = {}) {
  cfg.validate();
  BamaniResult r;
  detail::run_stage("blacklist", r, cb, [&] { r.constraints = build_blacklist(d, cfg.knowledge, cfg.leaf_zero_threshold); });

  detail::run_stage("ensemble", r, cb, [&] {
    // Parallelism goes to the replicates; algorithms run in roster order.
    for (auto alg : cfg.roster) {
      BootstrapOptions opt;
      opt.replicates = cfg.replicates;
      opt.seed = derive_seed(cfg.seed, algorithm_stream(alg));
      opt.threshold = cfg.averaging_threshold;
      opt.workers = cfg.workers;
      auto b = bootstrap_average(alg, d, r.constraints, cfg.learner, opt);
      r.members.push_back(member_network(alg, b.averaged, d));
      r.bootstraps.push_back(std::move(b));
    }
    r.pool = build_pool(r.members);
  });

  detail::run_stage("whitelist", r, cb, [&] {
    if (r.pool.empty()) {
      warn("no arcs in the ensemble pool; the final learn uses the user constraints only");
      r.whitelist.arcs = r.constraints.whitelist();
      return;
    }
    r.grid = quantile_grid(r.pool, cfg.quantiles);
    r.selection = sweep_and_select(d, r.pool, r.constraints, *r.grid, cfg.reference, cfg.learner, cfg.workers);
    ArcSet e = r.selection.arcs;
    ArcSet kept = r.constraints.whitelist();
    for (const auto& a : e)
      if (r.constraints.forbids(a))
        warn("selected arc " + to_string(a) + " is blacklisted and is dropped");
      else
        kept.insert(a);
    r.whitelist = resolve_cycles(std::move(kept), r.pool, r.constraints.whitelist());
  });

  detail::run_stage("final", r, cb, [&] {
    const auto g = learn(cfg.reference, d, r.constraints.with_whitelist(r.whitelist.arcs), cfg.learner);
    r.network = fit_parameters(g, d);
    r.strengths = arc_strengths(g, d, &r.log_strengths);
    r.network.set_strengths(r.strengths, r.log_strengths);
  });
  return r;
}

}  // namespace bamani
