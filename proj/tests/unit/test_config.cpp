#include <gtest/gtest.h>

#include <filesystem>

#include "bamani/config.hpp"

using namespace bamani;
using nlohmann::json;

namespace {

RunConfig parse(const json& j) { return parse_config_json(j); }

std::string field_of(const json& j) {
  try {
    parse(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

const json kMinimal{{"data", "d.csv"}, {"seed", 3}};

json with(json j, const std::string& k, json v) {
  j[k] = std::move(v);
  return j;
}

}  // namespace

TEST(Config, MinimalGetsDefaults) {
  const auto c = parse(kMinimal);
  EXPECT_EQ(c.algorithms.size(), 8u);
  EXPECT_EQ(c.replicates, 500u);
  EXPECT_EQ(c.quantiles, 10u);
  EXPECT_EQ(c.alpha, 0.05);
  EXPECT_EQ(c.reference, AlgorithmId::TABU);
  EXPECT_FALSE(c.threshold.has_value());
  EXPECT_EQ(c.seed, 3u);
  const auto j = c.to_json();
  EXPECT_EQ(j["threshold"], "auto");
  EXPECT_EQ(j["algorithms"].size(), 8u);
}

TEST(Config, FieldPathErrors) {
  EXPECT_EQ(field_of(with(kMinimal, "alpha", 1.5)), "alpha");
  EXPECT_EQ(field_of(with(kMinimal, "alpha", 0.0)), "alpha");
  EXPECT_EQ(field_of(with(kMinimal, "replicates", 0)), "replicates");
  EXPECT_EQ(field_of(with(kMinimal, "replicates", -4)), "replicates");
  EXPECT_EQ(field_of(with(kMinimal, "quantiles", 1)), "quantiles");
  EXPECT_EQ(field_of(with(kMinimal, "algorithms", json::array())), "algorithms");
  EXPECT_EQ(field_of(with(kMinimal, "algorithms", {"HC", "XYZ"})), "algorithms[1]");
  EXPECT_EQ(field_of(with(kMinimal, "algorithms", {"HC", "HC"})), "algorithms[1]");
  EXPECT_EQ(field_of(with(kMinimal, "algorithms", {"MMPC"})), "algorithms[0]");
  EXPECT_EQ(field_of(with(kMinimal, "reference", "IAMB_FDR_X")), "reference");
  EXPECT_EQ(field_of(with(kMinimal, "threshold", "sometimes")), "threshold");
  EXPECT_EQ(field_of(with(kMinimal, "threshold", 1.5)), "threshold");
  EXPECT_EQ(field_of(with(kMinimal, "blacklist", {{"A"}})), "blacklist[0]");
  EXPECT_EQ(field_of(with(kMinimal, "alpah", 0.1)), "alpah");
  EXPECT_EQ(field_of(json{{"data", "d.csv"}}), "seed");
  EXPECT_EQ(field_of(json{{"seed", 1}}), "data");
  EXPECT_EQ(field_of(with(kMinimal, "seed", -1)), "seed");
  EXPECT_EQ(field_of(json::array()), "<root>");
}

TEST(Config, ConflictNamesThePair) {
  auto j = with(kMinimal, "blacklist", json::array({json::array({"A", "B"})}));
  j["whitelist"] = json::array({"A->B"});
  try {
    parse(j);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("A->B"), std::string::npos) << e.what();
  }
}

TEST(Config, ArcSpellings) {
  const auto c = parse(with(kMinimal, "blacklist", json::array({json::array({"A", "B"}), json{{"from", "C"}, {"to", "D"}}, "E -> F"})));
  EXPECT_EQ(c.blacklist, (ArcSet{{"A", "B"}, {"C", "D"}, {"E", "F"}}));
}

TEST(Config, Leaves) {
  EXPECT_TRUE(parse(with(kMinimal, "leaves", "auto")).auto_leaves);
  const auto c = parse(with(kMinimal, "leaves", {"X", "Y"}));
  EXPECT_FALSE(c.auto_leaves);
  EXPECT_EQ(c.leaves, (std::set<std::string>{"X", "Y"}));
  const auto both = parse(with(kMinimal, "leaves", {{"auto", true}, {"names", {"X"}}}));
  EXPECT_TRUE(both.auto_leaves);
  EXPECT_EQ(both.leaves.size(), 1u);
  EXPECT_EQ(field_of(with(kMinimal, "leaves", {{"auto", true}, {"other", 1}})), "leaves.other");
}

TEST(Config, EffectiveConfigRoundTrips) {
  auto j = kMinimal;
  j["algorithms"] = {"GS", "HC"};
  j["threshold"] = 0.4;
  j["roots"] = {"R"};
  j["leaves"] = "auto";
  j["max_conditioning"] = 2;
  const auto c = parse(j);
  const auto again = parse(c.to_json());
  EXPECT_EQ(again.to_json(), c.to_json());
  EXPECT_EQ(again.digest(), c.digest());
}

TEST(Config, DigestTracksConfigNotOutputDir) {
  const auto base = parse(kMinimal);
  EXPECT_EQ(base.digest().size(), 16u);
  EXPECT_EQ(parse(with(kMinimal, "output_dir", "elsewhere")).digest(), base.digest());
  EXPECT_EQ(parse(with(kMinimal, "replicates", 500)).digest(), base.digest());  // explicit default
  for (const auto& [k, v] : std::vector<std::pair<std::string, json>>{
           {"seed", 4}, {"replicates", 501}, {"alpha", 0.01}, {"quantiles", 5}, {"threshold", 0.5}, {"roots", {"A"}}})
    EXPECT_NE(parse(with(kMinimal, k, v)).digest(), base.digest()) << k;
}

TEST(Config, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Config, PathsResolveAgainstConfigFile) {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "bamani_config_test";
  fs::create_directories(dir);
  const auto path = dir / "c.json";
  {
    std::ofstream out(path);
    out << with(kMinimal, "output_dir", "out").dump();
  }
  const auto c = parse_config(path);
  EXPECT_EQ(fs::path(c.data), (dir / "d.csv").lexically_normal());
  EXPECT_EQ(fs::path(c.output_dir), (dir / "out").lexically_normal());
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  EXPECT_THROW(parse_config(path), ConfigError);
  EXPECT_THROW(parse_config(dir / "missing.json"), DataError);
  fs::remove_all(dir);
}

TEST(Config, PipelineMapping) {
  auto j = kMinimal;
  j["algorithms"] = {"PC_STABLE", "TABU"};
  j["tabu_length"] = 4;
  j["alpha"] = 0.01;
  j["leaf_zero_threshold"] = 0.6;
  const auto p = parse(j).pipeline(3);
  EXPECT_EQ(p.roster, (std::vector<AlgorithmId>{AlgorithmId::PC_STABLE, AlgorithmId::TABU}));
  EXPECT_EQ(p.learner.alpha, 0.01);
  EXPECT_EQ(p.learner.tabu_length, 4u);
  EXPECT_EQ(p.leaf_zero_threshold, 0.6);
  EXPECT_EQ(p.workers, 3u);
  EXPECT_EQ(p.seed, 3u);
}
