#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "bamani/network.hpp"
#include "bamani/parallel.hpp"
#include "bamani/rng.hpp"

namespace bamani {

using Evidence = std::map<std::string, double>;

namespace detail {

// Samples are drawn in blocks with their own derived seeds so the result does
// not depend on how blocks are spread over workers.
inline constexpr std::size_t kSampleBlock = 4096;

struct CompiledNetwork {
  std::vector<NodeId> order;                 // topological, dag indices
  std::vector<std::vector<NodeId>> parents;  // aligned with coefficients
  std::vector<const NodeParameters*> params;
};

inline CompiledNetwork compile(const FittedNetwork& net) {
  const auto& g = net.dag();
  CompiledNetwork c;
  c.order = topological_order(g);
  c.parents.resize(g.size());
  c.params.resize(g.size());
  for (NodeId v = 0; v < g.size(); ++v) {
    const auto& p = net.node(g.name(v));
    c.params[v] = &p;
    for (const auto& pa : p.parents) c.parents[v].push_back(g.index_of(pa));
  }
  return c;
}

inline double conditional_mean(const CompiledNetwork& c, NodeId v, const double* row) {
  const auto& p = *c.params[v];
  double mu = p.intercept;
  for (std::size_t i = 0; i < c.parents[v].size(); ++i) mu += p.coefficients[i] * row[c.parents[v][i]];
  return mu;
}

inline double log_density(double x, double mu, double sd) {
  if (sd == 0.0) {
    const double tol = 1e-9 * std::max(1.0, std::abs(x));
    return std::abs(x - mu) <= tol ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  const double z = (x - mu) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

}  // namespace detail

// Ancestral sampling; columns follow the network's node order.
inline Dataset forward_sample(const FittedNetwork& net, std::size_t n, std::uint64_t seed, std::size_t workers = 1) {
  const auto c = detail::compile(net);
  const auto p = net.dag().size();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(static_cast<Eigen::Index>(n),
                                                                             static_cast<Eigen::Index>(p));
  const std::size_t blocks = (n + detail::kSampleBlock - 1) / detail::kSampleBlock;
  parallel_for(blocks, workers, [&](std::size_t b) {
    Rng rng(derive_seed(seed, b));
    const std::size_t end = std::min(n, (b + 1) * detail::kSampleBlock);
    for (std::size_t i = b * detail::kSampleBlock; i < end; ++i) {
      double* row = out.data() + i * p;
      for (auto v : c.order) row[v] = detail::conditional_mean(c, v, row) + c.params[v]->residual_sd * rng.normal();
    }
  });
  return Dataset(net.dag().names(), Eigen::MatrixXd(out));
}

struct WeightedSamples {
  std::vector<std::string> targets;
  Eigen::MatrixXd values;       // one column per target
  std::vector<double> weights;  // scaled so the largest is 1
  double effective_sample_size = 0.0;

  double weighted_mean(std::string_view target) const {
    const auto it = std::find(targets.begin(), targets.end(), target);
    if (it == targets.end()) throw DataError("'" + std::string(target) + "' is not a query target");
    const auto col = static_cast<Eigen::Index>(it - targets.begin());
    double sw = 0.0, s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      sw += weights[i];
      s += weights[i] * values(static_cast<Eigen::Index>(i), col);
    }
    return s / sw;
  }
};

// Likelihood weighting: evidence nodes are clamped and each sample is weighted
// by the density of the clamped values given their sampled parents.
inline WeightedSamples conditional_query(const FittedNetwork& net, const Evidence& evidence,
                                         const std::vector<std::string>& targets, std::size_t n, std::uint64_t seed,
                                         std::size_t workers = 1) {
  const auto& g = net.dag();
  const auto c = detail::compile(net);
  const auto p = g.size();
  std::vector<char> clamped(p, 0);
  std::vector<double> clamp_value(p, 0.0);
  for (const auto& [name, value] : evidence) {
    if (!std::isfinite(value)) throw DataError("evidence for '" + name + "' is not finite");
    const auto v = g.index_of(name);
    clamped[v] = 1;
    clamp_value[v] = value;
  }
  std::vector<NodeId> target_ids;
  for (const auto& t : targets) {
    if (evidence.count(t)) throw DataError("'" + t + "' is both evidence and a query target");
    target_ids.push_back(g.index_of(t));
  }
  if (targets.empty()) throw DataError("no query targets");

  WeightedSamples out;
  out.targets = targets;
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(targets.size()));
  std::vector<double> logw(n, 0.0);
  const std::size_t blocks = (n + detail::kSampleBlock - 1) / detail::kSampleBlock;
  parallel_for(blocks, workers, [&](std::size_t b) {
    Rng rng(derive_seed(seed, b));
    std::vector<double> row(p);
    const std::size_t end = std::min(n, (b + 1) * detail::kSampleBlock);
    for (std::size_t i = b * detail::kSampleBlock; i < end; ++i) {
      double lw = 0.0;
      for (auto v : c.order) {
        const double mu = detail::conditional_mean(c, v, row.data());
        if (clamped[v]) {
          row[v] = clamp_value[v];
          lw += detail::log_density(row[v], mu, c.params[v]->residual_sd);
        } else {
          row[v] = mu + c.params[v]->residual_sd * rng.normal();
        }
      }
      logw[i] = lw;
      for (std::size_t t = 0; t < target_ids.size(); ++t)
        out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = row[target_ids[t]];
    }
  });

  const double top = n == 0 ? 0.0 : *std::max_element(logw.begin(), logw.end());
  if (n > 0 && !std::isfinite(top)) throw DataError("every sample has zero weight: the evidence is impossible under the network");
  out.weights.resize(n);
  double sw = 0.0, sw2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.weights[i] = std::exp(logw[i] - top);
    sw += out.weights[i];
    sw2 += out.weights[i] * out.weights[i];
  }
  out.effective_sample_size = sw2 > 0.0 ? sw * sw / sw2 : 0.0;
  return out;
}

inline std::string to_csv(const WeightedSamples& s) {
  std::string out;
  for (const auto& t : s.targets) out += t + ",";
  out += "weight\n";
  for (std::size_t i = 0; i < s.weights.size(); ++i) {
    for (Eigen::Index t = 0; t < s.values.cols(); ++t) out += format_double(s.values(static_cast<Eigen::Index>(i), t)) + ",";
    out += format_double(s.weights[i]) + "\n";
  }
  return out;
}

// Parse "A=1,B=-0.5".
inline Evidence parse_evidence(std::string_view text) {
  Evidence e;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) throw DataError("bad evidence item '" + std::string(item) + "' (want NAME=VALUE)");
    const std::string name(detail::trim(item.substr(0, eq)));
    const std::string value(detail::trim(item.substr(eq + 1)));
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
      throw DataError("bad evidence value '" + value + "' for '" + name + "'");
    if (!e.emplace(name, v).second) throw DataError("evidence for '" + name + "' given twice");
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return e;
}

}  // namespace bamani
