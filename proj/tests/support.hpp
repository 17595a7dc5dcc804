#pragma once

// Test-side helpers. Nothing here calls the library's samplers or statistics,
// so the oracles built on them are independent of the code under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bamani/dataset.hpp"
#include "bamani/graph.hpp"

namespace testing_support {

// Linear SEM given as (child, {(parent, coef)}, intercept, noise sd), listed in
// a causal order.
struct Equation {
  std::string node;
  std::vector<std::pair<std::string, double>> parents = {};
  double intercept = 0.0;
  double sd = 1.0;
};

inline bamani::Dataset simulate(const std::vector<Equation>& eqs, std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<std::string> names;
  std::map<std::string, Eigen::Index> col;
  for (const auto& e : eqs) {
    col[e.node] = static_cast<Eigen::Index>(names.size());
    names.push_back(e.node);
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(eqs.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (const auto& e : eqs) {
      double v = e.intercept + e.sd * z(gen);
      for (const auto& [p, c] : e.parents) v += c * m(r, col.at(p));
      m(r, col.at(e.node)) = v;
    }
  return bamani::Dataset(names, m);
}

inline bamani::Dataset chain_data(std::size_t n, unsigned seed) {
  return simulate({{"A", {}, 0.0, 1.0}, {"B", {{"A", 0.8}}, 0.0, 1.0}, {"C", {{"B", 0.8}}, 0.0, 1.0}}, n, seed);
}

inline bamani::Dataset collider_data(std::size_t n, unsigned seed) {
  return simulate({{"A", {}, 0.0, 1.0}, {"B", {}, 0.0, 1.0}, {"C", {{"A", 0.8}, {"B", 0.8}}, 0.0, 1.0}}, n, seed);
}

inline bamani::Dataset independent_data(std::size_t cols, std::size_t n, unsigned seed) {
  std::vector<Equation> eqs;
  for (std::size_t i = 0; i < cols; ++i) eqs.push_back({"X" + std::to_string(i), {}, 0.0, 1.0});
  return simulate(eqs, n, seed);
}

// Random linear SEM over nodes V0..V{n-1}: arcs follow a shuffled order
// with probability p; coefficients are +-U(lo, hi).
struct RandomSem {
  std::vector<Equation> equations;  // causal order
  bamani::Dag dag;
};

inline RandomSem random_sem(std::size_t n, double p, std::mt19937& gen, double lo = 0.5, double hi = 1.5) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("V" + std::to_string(i));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), gen);
  std::bernoulli_distribution coin(p);
  std::uniform_real_distribution<double> mag(lo, hi);
  std::bernoulli_distribution sign(0.5);
  RandomSem out{{}, bamani::Dag(names)};
  for (std::size_t i = 0; i < n; ++i) {
    Equation e{names[order[i]], {}, 0.0, 1.0};
    for (std::size_t j = 0; j < i; ++j)
      if (coin(gen)) {
        e.parents.push_back({names[order[j]], (sign(gen) ? 1.0 : -1.0) * mag(gen)});
        out.dag.add_arc(order[j], order[i]);
      }
    out.equations.push_back(e);
  }
  return out;
}

// Columns of `d` reordered to follow `names`.
inline bamani::Dataset reorder(const bamani::Dataset& d, const std::vector<std::string>& names) {
  Eigen::MatrixXd m(d.values().rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = d.column(names[i]);
  return bamani::Dataset(names, m);
}

// One-sample Kolmogorov-Smirnov statistic against U(0, 1).
inline double ks_uniform(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = std::clamp(x[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / static_cast<double>(a.size()) -
                             static_cast<double>(j) / static_cast<double>(b.size())));
  }
  return d;
}

// Adjacency-matrix acyclicity by repeated removal of sinks.
inline bool acyclic(const std::vector<std::vector<int>>& adj) {
  const std::size_t n = adj.size();
  std::vector<bool> gone(n, false);
  for (std::size_t round = 0; round < n; ++round) {
    bool found = false;
    for (std::size_t v = 0; v < n && !found; ++v) {
      if (gone[v]) continue;
      bool sink = true;
      for (std::size_t w = 0; w < n; ++w)
        if (!gone[w] && adj[v][w]) sink = false;
      if (sink) gone[v] = found = true;
    }
    if (!found) return false;
  }
  return true;
}

// Every labelled DAG on the given nodes.
inline std::vector<bamani::Dag> all_dags(const std::vector<std::string>& names) {
  const std::size_t n = names.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) pairs.push_back({u, v});
  std::vector<bamani::Dag> out;
  std::size_t total = 1;
  for (std::size_t i = 0; i < pairs.size(); ++i) total *= 3;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<std::vector<int>> adj(n, std::vector<int>(n, 0));
    std::size_t c = code;
    for (auto [u, v] : pairs) {
      const auto state = c % 3;
      c /= 3;
      if (state == 1) adj[u][v] = 1;
      if (state == 2) adj[v][u] = 1;
    }
    if (!acyclic(adj)) continue;
    bamani::Dag g(names);
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = 0; v < n; ++v)
        if (adj[u][v]) g.add_arc(u, v);
    out.push_back(g);
  }
  return out;
}

// d-separation by enumerating every simple path in the skeleton. A path is
// blocked when some inner node is a non-collider in z, or a collider with no
// descendant (itself included) in z.
inline bool brute_force_d_separated(const bamani::Dag& g, std::size_t x, std::size_t y, const std::vector<std::size_t>& z) {
  const std::size_t n = g.size();
  std::vector<bool> in_z(n, false);
  for (auto v : z) in_z[v] = true;
  auto has_desc_in_z = [&](std::size_t v) {
    for (std::size_t w = 0; w < n; ++w)
      if (in_z[w] && (w == v || g.has_path(v, w))) return true;
    return false;
  };
  std::vector<std::size_t> path{x};
  std::vector<bool> on(n, false);
  on[x] = true;
  bool connected = false;
  std::function<void()> walk = [&]() {
    if (connected) return;
    const auto last = path.back();
    if (last == y) {
      for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        const auto a = path[i - 1], b = path[i], c = path[i + 1];
        const bool collider = g.has_arc(a, b) && g.has_arc(c, b);
        if (collider ? !has_desc_in_z(b) : in_z[b]) return;
      }
      connected = true;
      return;
    }
    for (std::size_t w = 0; w < n; ++w) {
      if (on[w] || !g.adjacent(last, w)) continue;
      on[w] = true;
      path.push_back(w);
      walk();
      path.pop_back();
      on[w] = false;
    }
  };
  walk();
  return !connected;
}

}  // namespace testing_support
