#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bamani/pipeline.hpp"

namespace bamani {

// FNV-1a, 64-bit, as 16 hex digits.
inline std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct RunConfig {
  std::string data;
  std::uint64_t seed = 0;
  std::vector<AlgorithmId> algorithms{std::begin(kTopLevelAlgorithms), std::end(kTopLevelAlgorithms)};
  std::size_t replicates = 500;
  std::optional<double> threshold;  // nullopt: "auto"
  std::size_t quantiles = 10;
  AlgorithmId reference = AlgorithmId::TABU;
  double alpha = 0.05;
  ArcSet blacklist;
  ArcSet whitelist;
  std::set<std::string> roots;
  std::set<std::string> leaves;
  bool auto_leaves = false;
  double leaf_zero_threshold = 0.5;
  std::string output_dir = "bamani_out";
  std::size_t tabu_length = 10;
  std::size_t max_iterations = 1000;
  std::optional<std::size_t> max_conditioning;
  AlgorithmId restrict_phase = AlgorithmId::HITON_PC;
  AlgorithmId maximize_phase = AlgorithmId::TABU;
  bool standardize = false;

  LearnerConfig learner() const {
    LearnerConfig c;
    c.alpha = alpha;
    c.max_conditioning = max_conditioning;
    c.tabu_length = tabu_length;
    c.max_iterations = max_iterations;
    c.restrict_phase = restrict_phase;
    c.maximize_phase = maximize_phase;
    c.seed = seed;
    return c;
  }

  PipelineConfig pipeline(std::size_t workers = 1) const {
    PipelineConfig p;
    p.knowledge = {blacklist, whitelist, roots, leaves, auto_leaves};
    p.leaf_zero_threshold = leaf_zero_threshold;
    p.roster = algorithms;
    p.replicates = replicates;
    p.averaging_threshold = threshold;
    p.quantiles = quantiles;
    p.reference = reference;
    p.learner = learner();
    p.seed = seed;
    p.workers = workers;
    return p;
  }

  // Effective configuration after defaults; the digest is taken over its dump.
  nlohmann::json to_json() const {
    using nlohmann::json;
    auto arcs = [](const ArcSet& s) {
      json a = json::array();
      for (const auto& x : s) a.push_back({x.from, x.to});
      return a;
    };
    auto phase_names = [](const std::vector<AlgorithmId>& v) {
      std::vector<std::string> out;
      for (auto a : v) out.push_back(to_string(a));
      return out;
    };
    json j;
    j["data"] = data;
    j["seed"] = seed;
    j["algorithms"] = phase_names(algorithms);
    j["replicates"] = replicates;
    j["threshold"] = threshold ? json(*threshold) : json("auto");
    j["quantiles"] = quantiles;
    j["reference"] = to_string(reference);
    j["alpha"] = alpha;
    j["blacklist"] = arcs(blacklist);
    j["whitelist"] = arcs(whitelist);
    j["roots"] = roots;
    j["leaves"] = auto_leaves && leaves.empty() ? json("auto") : json(leaves);
    if (auto_leaves && !leaves.empty()) j["leaves"] = json{{"auto", true}, {"names", leaves}};
    j["leaf_zero_threshold"] = leaf_zero_threshold;
    j["output_dir"] = output_dir;
    j["tabu_length"] = tabu_length;
    j["max_iterations"] = max_iterations;
    j["max_conditioning"] = max_conditioning ? json(*max_conditioning) : json(nullptr);
    j["restrict"] = to_string(restrict_phase);
    j["maximize"] = to_string(maximize_phase);
    j["standardize"] = standardize;
    return j;
  }

  // Where results go does not change them, so output_dir is left out.
  std::string digest() const {
    auto j = to_json();
    j.erase("output_dir");
    return fnv1a_hex(j.dump());
  }

  void validate() const {
    if (data.empty()) throw ConfigError("data", "missing");
    pipeline().validate();
    ConstraintSpec(blacklist, whitelist, roots, leaves);
  }
};

namespace detail {

template <typename T>
T get_field(const nlohmann::json& j, const std::string& path, const char* what) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path, std::string("expected ") + what);
  }
}

inline std::size_t get_count(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(path, "expected a non-negative integer");
  return j.get<std::size_t>();
}

inline double get_real(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

inline AlgorithmId get_algorithm(const nlohmann::json& j, const std::string& path) {
  const auto s = get_field<std::string>(j, path, "an algorithm name");
  try {
    return algorithm_from_string(s);
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

inline std::set<std::string> get_names(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of node names");
  std::set<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.insert(get_field<std::string>(j[i], path + "[" + std::to_string(i) + "]", "a node name"));
  return out;
}

// Arcs as ["A", "B"] pairs, {"from": "A", "to": "B"} objects or "A->B" strings.
inline ArcSet get_arcs(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of arcs");
  ArcSet out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto p = path + "[" + std::to_string(i) + "]";
    const auto& a = j[i];
    Arc arc;
    if (a.is_array() && a.size() == 2 && a[0].is_string() && a[1].is_string()) {
      arc = {a[0].get<std::string>(), a[1].get<std::string>()};
    } else if (a.is_object() && a.size() == 2 && a.contains("from") && a.contains("to")) {
      arc = {get_field<std::string>(a["from"], p + ".from", "a node name"),
             get_field<std::string>(a["to"], p + ".to", "a node name")};
    } else if (a.is_string() && a.get<std::string>().find("->") != std::string::npos) {
      const auto s = a.get<std::string>();
      const auto k = s.find("->");
      arc = {std::string(bamani::detail::trim(s.substr(0, k))), std::string(bamani::detail::trim(s.substr(k + 2)))};
    } else {
      throw ConfigError(p, "expected [\"from\", \"to\"], {\"from\": .., \"to\": ..} or \"from->to\"");
    }
    if (arc.from.empty() || arc.to.empty()) throw ConfigError(p, "empty node name");
    out.insert(arc);
  }
  return out;
}

}  // namespace detail

// Strict: unknown keys are errors. `data` and `seed` are required.
inline RunConfig parse_config_json(const nlohmann::json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  static const std::set<std::string> known{
      "data",        "seed",        "algorithms",          "replicates", "threshold",    "quantiles",
      "reference",   "alpha",       "blacklist",           "whitelist",  "roots",        "leaves",
      "leaf_zero_threshold",        "output_dir",          "tabu_length", "max_iterations",
      "max_conditioning",           "restrict",            "maximize",   "standardize"};
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) throw ConfigError(k, "unknown key");

  RunConfig c;
  if (!j.contains("data")) throw ConfigError("data", "required");
  c.data = get_field<std::string>(j["data"], "data", "a file path");
  if (!j.contains("seed")) throw ConfigError("seed", "required (no clock-based default)");
  if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
    throw ConfigError("seed", "expected a non-negative integer");
  c.seed = j["seed"].get<std::uint64_t>();

  if (j.contains("algorithms")) {
    const auto& a = j["algorithms"];
    if (!a.is_array()) throw ConfigError("algorithms", "expected an array");
    c.algorithms.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto path = "algorithms[" + std::to_string(i) + "]";
      const auto id = get_algorithm(a[i], path);
      if (!is_top_level(id)) throw ConfigError(path, to_string(id) + " is not a structure learner");
      if (std::find(c.algorithms.begin(), c.algorithms.end(), id) != c.algorithms.end())
        throw ConfigError(path, "duplicate algorithm " + to_string(id));
      c.algorithms.push_back(id);
    }
  }
  if (j.contains("replicates")) c.replicates = get_count(j["replicates"], "replicates");
  if (j.contains("threshold")) {
    const auto& t = j["threshold"];
    if (t.is_string() && t.get<std::string>() == "auto")
      c.threshold.reset();
    else if (t.is_number())
      c.threshold = t.get<double>();
    else
      throw ConfigError("threshold", "expected \"auto\" or a number");
  }
  if (j.contains("quantiles")) c.quantiles = get_count(j["quantiles"], "quantiles");
  if (j.contains("reference")) {
    c.reference = get_algorithm(j["reference"], "reference");
    if (!is_top_level(c.reference)) throw ConfigError("reference", to_string(c.reference) + " is not a structure learner");
  }
  if (j.contains("alpha")) c.alpha = get_real(j["alpha"], "alpha");
  if (j.contains("blacklist")) c.blacklist = get_arcs(j["blacklist"], "blacklist");
  if (j.contains("whitelist")) c.whitelist = get_arcs(j["whitelist"], "whitelist");
  if (j.contains("roots")) c.roots = get_names(j["roots"], "roots");
  if (j.contains("leaves")) {
    const auto& l = j["leaves"];
    if (l.is_string() && l.get<std::string>() == "auto")
      c.auto_leaves = true;
    else if (l.is_array())
      c.leaves = get_names(l, "leaves");
    else if (l.is_object()) {
      for (const auto& [k, _] : l.items())
        if (k != "auto" && k != "names") throw ConfigError("leaves." + k, "unknown key");
      if (l.contains("auto")) c.auto_leaves = get_field<bool>(l["auto"], "leaves.auto", "a boolean");
      if (l.contains("names")) c.leaves = get_names(l["names"], "leaves.names");
    } else {
      throw ConfigError("leaves", "expected \"auto\" or an array of node names");
    }
  }
  if (j.contains("leaf_zero_threshold")) c.leaf_zero_threshold = get_real(j["leaf_zero_threshold"], "leaf_zero_threshold");
  if (j.contains("output_dir")) c.output_dir = get_field<std::string>(j["output_dir"], "output_dir", "a directory path");
  if (j.contains("tabu_length")) c.tabu_length = get_count(j["tabu_length"], "tabu_length");
  if (j.contains("max_iterations")) c.max_iterations = get_count(j["max_iterations"], "max_iterations");
  if (j.contains("max_conditioning") && !j["max_conditioning"].is_null())
    c.max_conditioning = get_count(j["max_conditioning"], "max_conditioning");
  if (j.contains("restrict")) c.restrict_phase = get_algorithm(j["restrict"], "restrict");
  if (j.contains("maximize")) c.maximize_phase = get_algorithm(j["maximize"], "maximize");
  if (j.contains("standardize")) c.standardize = get_field<bool>(j["standardize"], "standardize", "a boolean");

  try {
    ConstraintSpec(c.blacklist, c.whitelist, c.roots, c.leaves);
  } catch (const GraphError& e) {
    throw ConfigError("whitelist", e.what());
  }
  c.validate();
  return c;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<root>", path.string() + ": " + e.what());
  }
}

// Relative `data` and `output_dir` are resolved against the config file's directory.
inline RunConfig parse_config(const std::filesystem::path& path) {
  auto c = parse_config_json(read_json_file(path));
  const auto base = path.parent_path();
  if (std::filesystem::path(c.data).is_relative()) c.data = (base / c.data).lexically_normal().string();
  if (std::filesystem::path(c.output_dir).is_relative()) c.output_dir = (base / c.output_dir).lexically_normal().string();
  return c;
}

}  // namespace bamani
