#pragma once

#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

#include "bamani/network.hpp"

namespace bamani {

inline std::string sig3(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.3g", x);
  return buf;
}

// Promoting arcs black, inhibiting arcs red, labelled with the coefficient.
inline std::string export_dot(const FittedNetwork& net, const std::string& digest = "") {
  std::string out;
  if (!digest.empty()) out += "// config_digest=" + digest + "\n";
  out += "digraph bamani {\n";
  for (const auto& p : net.nodes())
    out += "  \"" + p.name + "\" [label=\"" + p.name + "\\nmean=" + sig3(p.mean) + "\"];\n";
  for (const auto& a : net.arcs()) {
    const char* color = a.sign == ArcSign::Promote ? "black" : a.sign == ArcSign::Inhibit ? "red" : "gray";
    out += "  \"" + a.arc.from + "\" -> \"" + a.arc.to + "\" [color=" + color + ", label=\"" + sig3(a.coefficient) + "\"];\n";
  }
  out += "}\n";
  return out;
}

// Object keys come out sorted (nlohmann's default map); doubles use the
// shortest round-trip form.
inline nlohmann::json network_to_json(const FittedNetwork& net, const nlohmann::json& metadata = nlohmann::json::object()) {
  using nlohmann::json;
  json nodes = json::array();
  for (const auto& name : net.dag().names()) {
    const auto& p = net.node(name);
    nodes.push_back({{"name", p.name},
                     {"intercept", p.intercept},
                     {"parents", p.parents},
                     {"coefficients", p.coefficients},
                     {"residual_sd", p.residual_sd},
                     {"mean", p.mean}});
  }
  json arcs = json::array();
  for (const auto& a : net.arcs())
    arcs.push_back({{"from", a.arc.from},
                    {"to", a.arc.to},
                    {"coefficient", a.coefficient},
                    {"sign", to_string(a.sign)},
                    {"strength", a.strength ? json(*a.strength) : json(nullptr)},
                    {"log_strength", a.log_strength ? json(*a.log_strength) : json(nullptr)}});
  return {{"nodes", nodes}, {"arcs", arcs}, {"metadata", metadata}};
}

inline std::string export_json(const FittedNetwork& net, const nlohmann::json& metadata = nlohmann::json::object()) {
  return network_to_json(net, metadata).dump(2) + "\n";
}

struct LoadedNetwork {
  FittedNetwork network;
  nlohmann::json metadata;
};

inline LoadedNetwork parse_network_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("network JSON: ") + e.what());
  }
  try {
    std::vector<std::string> names;
    std::vector<NodeParameters> params;
    std::vector<Arc> arcs;
    for (const auto& n : j.at("nodes")) {
      NodeParameters p;
      p.name = n.at("name").get<std::string>();
      p.intercept = n.at("intercept").get<double>();
      p.parents = n.at("parents").get<std::vector<std::string>>();
      p.coefficients = n.at("coefficients").get<std::vector<double>>();
      p.residual_sd = n.at("residual_sd").get<double>();
      p.mean = n.at("mean").get<double>();
      names.push_back(p.name);
      for (const auto& pa : p.parents) arcs.push_back({pa, p.name});
      params.push_back(std::move(p));
    }
    FittedNetwork net(Dag(names, arcs), std::move(params));
    std::map<Arc, double> strengths, log_strengths;
    for (const auto& a : j.at("arcs")) {
      const Arc arc{a.at("from").get<std::string>(), a.at("to").get<std::string>()};
      const auto& stored = net.arc(arc);
      if (parse_sign(a.at("sign").get<std::string>()) != stored.sign)
        throw DataError("arc " + to_string(arc) + ": sign disagrees with its coefficient");
      if (!a.at("strength").is_null()) strengths[arc] = a.at("strength").get<double>();
      if (a.contains("log_strength") && !a.at("log_strength").is_null())
        log_strengths[arc] = a.at("log_strength").get<double>();
    }
    if (j.at("arcs").size() != net.arcs().size()) throw DataError("arc list does not match the node parents");
    net.set_strengths(strengths, log_strengths);
    return {std::move(net), j.value("metadata", nlohmann::json::object())};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("network JSON: ") + e.what());
  }
}

}  // namespace bamani
