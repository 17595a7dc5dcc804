#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bamani/dataset.hpp"
#include "bamani/graph.hpp"
#include "bamani/log.hpp"
#include "bamani/stats.hpp"

namespace bamani {

enum class ArcSign { Promote, Inhibit, Neutral };

inline std::string to_string(ArcSign s) {
  switch (s) {
    case ArcSign::Promote: return "promote";
    case ArcSign::Inhibit: return "inhibit";
    case ArcSign::Neutral: return "neutral";
  }
  return "neutral";
}

inline ArcSign parse_sign(std::string_view s) {
  if (s == "promote") return ArcSign::Promote;
  if (s == "inhibit") return ArcSign::Inhibit;
  if (s == "neutral") return ArcSign::Neutral;
  throw DataError("unknown arc sign '" + std::string(s) + "'");
}

inline ArcSign sign_of(double coefficient) {
  return coefficient > 0.0 ? ArcSign::Promote : coefficient < 0.0 ? ArcSign::Inhibit : ArcSign::Neutral;
}

// Linear-Gaussian CPD: value = intercept + sum coefficients[i] * parents[i] + N(0, residual_sd^2).
struct NodeParameters {
  std::string name;
  double intercept = 0.0;
  std::vector<std::string> parents;  // sorted by name
  std::vector<double> coefficients;  // same order as parents
  double residual_sd = 0.0;
  double mean = 0.0;                 // sample mean of the node in the fitting data

  friend bool operator==(const NodeParameters&, const NodeParameters&) = default;
};

struct ArcAnnotation {
  Arc arc;
  double coefficient = 0.0;
  ArcSign sign = ArcSign::Neutral;
  std::optional<double> strength;
  std::optional<double> log_strength;  // natural log of strength, kept when strength underflows

  friend bool operator==(const ArcAnnotation&, const ArcAnnotation&) = default;
};

class FittedNetwork {
 public:
  FittedNetwork() = default;

  FittedNetwork(Dag dag, std::vector<NodeParameters> nodes) : dag_(std::move(dag)) {
    if (nodes.size() != dag_.size()) throw GraphError("parameter table does not match the network's nodes");
    for (auto& p : nodes) {
      const NodeId v = dag_.index_of(p.name);
      auto pa = dag_.parent_names(v);
      std::sort(pa.begin(), pa.end());
      if (pa != p.parents) throw GraphError("parameters for '" + p.name + "' list the wrong parents");
      if (p.coefficients.size() != p.parents.size())
        throw GraphError("'" + p.name + "': coefficient count differs from parent count");
      if (!(p.residual_sd >= 0.0)) throw GraphError("'" + p.name + "': negative residual sd");
      for (std::size_t i = 0; i < p.parents.size(); ++i)
        arcs_.push_back({{p.parents[i], p.name}, p.coefficients[i], sign_of(p.coefficients[i]), std::nullopt, std::nullopt});
    }
    std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    nodes_ = std::move(nodes);
    std::sort(arcs_.begin(), arcs_.end(), [](const auto& a, const auto& b) { return a.arc < b.arc; });
  }

  const Dag& dag() const { return dag_; }
  // Sorted by node name.
  const std::vector<NodeParameters>& nodes() const { return nodes_; }
  // Sorted by (from, to).
  const std::vector<ArcAnnotation>& arcs() const { return arcs_; }

  const NodeParameters& node(std::string_view name) const {
    for (const auto& p : nodes_)
      if (p.name == name) return p;
    throw GraphError("unknown node '" + std::string(name) + "'");
  }

  const ArcAnnotation& arc(const Arc& a) const {
    for (const auto& x : arcs_)
      if (x.arc == a) return x;
    throw GraphError("network has no arc " + to_string(a));
  }

  double coefficient(const Arc& a) const { return arc(a).coefficient; }

  void set_strengths(const std::map<Arc, double>& strengths, const std::map<Arc, double>& log_strengths = {}) {
    for (auto& x : arcs_) {
      auto it = strengths.find(x.arc);
      x.strength = it == strengths.end() ? std::nullopt : std::optional<double>(it->second);
      auto lg = log_strengths.find(x.arc);
      x.log_strength = lg == log_strengths.end() || !std::isfinite(lg->second) ? std::nullopt
                                                                                : std::optional<double>(lg->second);
    }
  }

  friend bool operator==(const FittedNetwork& a, const FittedNetwork& b) {
    return a.dag_ == b.dag_ && a.nodes_ == b.nodes_ && a.arcs_ == b.arcs_;
  }

 private:
  Dag dag_;
  std::vector<NodeParameters> nodes_;
  std::vector<ArcAnnotation> arcs_;
};

// Per-node OLS on the node's parents in g.
inline FittedNetwork fit_parameters(const Dag& g, const Dataset& d) {
  std::vector<NodeParameters> params;
  for (NodeId v = 0; v < g.size(); ++v) {
    NodeParameters p;
    p.name = g.name(v);
    p.parents = g.parent_names(v);
    std::sort(p.parents.begin(), p.parents.end());
    const auto fit = fit_node_ols(d, p.name, p.parents);
    p.intercept = fit.intercept;
    p.coefficients = fit.coefficients;
    p.residual_sd = fit.residual_sd;
    p.mean = d.column(p.name).mean();
    for (std::size_t i = 0; i < p.parents.size(); ++i)
      if (p.coefficients[i] == 0.0) warn("arc " + p.parents[i] + "->" + p.name + " has coefficient exactly 0 (neutral)");
    params.push_back(std::move(p));
  }
  return FittedNetwork(g, std::move(params));
}

}  // namespace bamani
