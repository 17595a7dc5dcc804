#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "bamani/pipeline.hpp"
#include "bamani/query.hpp"
#include "bamani/report.hpp"

namespace bamani {

inline std::vector<std::string> synthetic_names(std::size_t n) {
  const std::size_t width = std::max<std::size_t>(2, std::to_string(n).size());
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) {
    auto s = std::to_string(i);
    out.push_back("V" + std::string(width - s.size(), '0') + s);
  }
  return out;
}

// Random order, then each forward pair independently with probability
// expected_degree / (n - 1).
inline Dag random_dag(std::size_t n_nodes, double expected_degree, std::uint64_t seed) {
  if (n_nodes == 0) throw ConfigError("n_nodes", "must be at least 1");
  if (!(expected_degree >= 0.0)) throw ConfigError("expected_degree", "must be non-negative");
  Rng rng(seed);
  std::vector<NodeId> order(n_nodes);
  std::iota(order.begin(), order.end(), NodeId{0});
  for (std::size_t i = n_nodes; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  Dag g(synthetic_names(n_nodes));
  if (n_nodes == 1) return g;
  const double p = std::min(1.0, expected_degree / static_cast<double>(n_nodes - 1));
  for (std::size_t i = 0; i < n_nodes; ++i)
    for (std::size_t j = i + 1; j < n_nodes; ++j)
      if (rng.uniform() < p) g.add_arc(order[i], order[j]);
  return g;
}

// A linear-Gaussian SEM over a DAG; node means are the analytic ones.
struct GroundTruth {
  FittedNetwork sem;
  const Dag& dag() const { return sem.dag(); }
};

inline GroundTruth random_ground_truth(const Dag& g, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<NodeParameters> params(g.size());
  std::vector<double> mean(g.size(), 0.0);
  for (auto v : topological_order(g)) {
    auto& p = params[v];
    p.name = g.name(v);
    p.parents = g.parent_names(v);
    std::sort(p.parents.begin(), p.parents.end());
    p.intercept = rng.uniform(-1.0, 1.0);
    p.residual_sd = rng.uniform(0.2, 1.0);
    double m = p.intercept;
    for (const auto& pa : p.parents) {
      const double c = rng.uniform(0.5, 2.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
      p.coefficients.push_back(c);
      m += c * mean[g.index_of(pa)];
    }
    mean[v] = p.mean = m;
  }
  return {FittedNetwork(g, std::move(params))};
}

inline Dataset sample_sem(const GroundTruth& gt, std::size_t n, std::uint64_t seed, std::size_t workers = 1) {
  if (n == 0) throw ConfigError("n_obs", "must be at least 1");
  return forward_sample(gt.sem, n, seed, workers);
}

struct RecoveryScore {
  std::size_t shd = 0;
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
  double skeleton_precision = 1.0;
  double skeleton_recall = 1.0;
  double skeleton_f1 = 1.0;
};

namespace detail {

// Empty prediction: precision 1. Empty truth: recall 1.
inline void prf(std::size_t tp, std::size_t predicted, std::size_t actual, double& p, double& r, double& f) {
  p = predicted == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(predicted);
  r = actual == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(actual);
  f = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

}  // namespace detail

inline RecoveryScore score_recovery(const Dag& truth, const Dag& learned) {
  if (truth.names() != learned.names()) throw GraphError("score_recovery: networks have different nodes");
  RecoveryScore s;
  s.shd = shd(truth, learned);
  std::size_t tp = 0, skel_tp = 0, t_edges = 0, l_edges = 0;
  for (NodeId u = 0; u < truth.size(); ++u)
    for (NodeId v = 0; v < truth.size(); ++v) {
      if (truth.has_arc(u, v) && learned.has_arc(u, v)) ++tp;
      if (u < v) {
        const bool a = truth.adjacent(u, v), b = learned.adjacent(u, v);
        t_edges += a;
        l_edges += b;
        skel_tp += a && b;
      }
    }
  detail::prf(tp, learned.arc_count(), truth.arc_count(), s.precision, s.recall, s.f1);
  detail::prf(skel_tp, l_edges, t_edges, s.skeleton_precision, s.skeleton_recall, s.skeleton_f1);
  return s;
}

struct BenchConfig {
  std::vector<std::size_t> n_nodes{8};
  double expected_degree = 2.0;
  std::vector<std::size_t> n_obs{1000};
  std::vector<std::uint64_t> seeds{1};
  PipelineConfig pipeline;  // roster, replicates, quantiles, reference, learner; knowledge is ignored
};

struct BenchRow {
  std::size_t n_nodes = 0;
  double expected_degree = 0.0;
  std::size_t n_obs = 0;
  std::uint64_t seed = 0;
  std::string method;  // algorithm id or "BAMANI"
  RecoveryScore score;
  std::size_t common = 0;  // arcs shared with the BaMANI network (single algorithms only)
  std::size_t stronger_in_ensemble = 0;
  double runtime_ms = 0.0;
  std::string error;
};

// One pipeline run per cell gives both the bootstrap-averaged single
// algorithms and the ensemble. A failing cell yields an error row.
inline std::vector<BenchRow> benchmark_suite(const BenchConfig& cfg) {
  std::vector<BenchRow> rows;
  for (auto nodes : cfg.n_nodes)
    for (auto n : cfg.n_obs)
      for (auto seed : cfg.seeds) {
        BenchRow base;
        base.n_nodes = nodes;
        base.expected_degree = cfg.expected_degree;
        base.n_obs = n;
        base.seed = seed;
        try {
          const auto truth = random_ground_truth(random_dag(nodes, cfg.expected_degree, derive_seed(seed, 1)),
                                                 derive_seed(seed, 2));
          const auto data = sample_sem(truth, n, derive_seed(seed, 3));
          PipelineConfig pc = cfg.pipeline;
          pc.knowledge = {};
          pc.seed = derive_seed(seed, 4);
          const auto t0 = std::chrono::steady_clock::now();
          const auto result = run_bamani(data, pc);
          const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
          for (const auto& m : result.members) {
            BenchRow r = base;
            r.method = to_string(m.algorithm);
            r.score = score_recovery(truth.dag(), m.dag);
            const auto cmp = compare_to_ensemble(result.network.dag(), result.strengths, m.dag, m.strengths, m.algorithm,
                                                 result.log_strengths, m.log_strengths);
            r.common = cmp.common;
            r.stronger_in_ensemble = cmp.stronger_in_ensemble;
            r.runtime_ms = ms;
            rows.push_back(std::move(r));
          }
          BenchRow r = base;
          r.method = "BAMANI";
          r.score = score_recovery(truth.dag(), result.network.dag());
          r.runtime_ms = ms;
          rows.push_back(std::move(r));
        } catch (const std::exception& e) {
          BenchRow r = base;
          r.method = "BAMANI";
          r.error = e.what();
          warn("bench cell (" + std::to_string(nodes) + ", " + std::to_string(n) + ", " + std::to_string(seed) +
               ") failed: " + e.what());
          rows.push_back(std::move(r));
        }
      }
  return rows;
}

inline std::string bench_csv(const std::vector<BenchRow>& rows, const std::string& digest = "") {
  std::string out = digest_line(digest) +
                    "n_nodes,expected_degree,n_obs,seed,algorithm,shd,precision,recall,f1,skeleton_f1,common_arcs,"
                    "stronger_in_ensemble,runtime_ms,error\n";
  for (const auto& r : rows) {
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.1f", r.runtime_ms);
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += std::to_string(r.n_nodes) + "," + format_double(r.expected_degree) + "," + std::to_string(r.n_obs) + "," +
           std::to_string(r.seed) + "," + r.method + "," + std::to_string(r.score.shd) + "," +
           format_double(r.score.precision) + "," + format_double(r.score.recall) + "," + format_double(r.score.f1) +
           "," + format_double(r.score.skeleton_f1) + "," + std::to_string(r.common) + "," +
           std::to_string(r.stronger_in_ensemble) + "," + ms + "," + err + "\n";
  }
  return out;
}

}  // namespace bamani
