#pragma once

// Command-line workflows. Needs CLI11 on the include path.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bamani/config.hpp"
#include "bamani/network_io.hpp"
#include "bamani/query.hpp"
#include "bamani/report.hpp"
#include "bamani/synthbench.hpp"

namespace bamani::cli {

namespace fs = std::filesystem;

inline void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("error writing '" + path.string() + "'");
}

// BAMANI_WORKERS overrides the default of one worker; --workers overrides both.
inline std::size_t default_workers() {
  if (const char* env = std::getenv("BAMANI_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
    warn("ignoring BAMANI_WORKERS='" + std::string(env) + "'");
  }
  return 1;
}

inline Dataset load_data(const RunConfig& c) {
  auto d = load_csv(c.data);
  return c.standardize ? standardize(d) : d;
}

inline nlohmann::json run_metadata(const RunConfig& c, const std::string& digest) {
  std::vector<std::string> roster;
  for (auto a : c.algorithms) roster.push_back(to_string(a));
  return {{"seed", c.seed},
          {"config_digest", digest},
          {"algorithms", roster},
          {"reference", to_string(c.reference)},
          {"quantiles", c.quantiles},
          {"replicates", c.replicates},
          {"averaging_threshold", c.threshold ? nlohmann::json(*c.threshold) : nlohmann::json("auto")},
          {"notes",
           {"arc frequencies count directed arcs; undirected edges of constraint-based learners take the "
            "direction of the DAG extension",
            "connectivity in diagnostic.csv is the arc count of the network learned at each threshold",
            "W_temp is the union over algorithms of arcs with strength below the threshold"}}};
}

struct RunLog {
  std::vector<std::string> lines;
  void add(std::string s) { lines.push_back(std::move(s)); }
  std::string text(const std::vector<std::string>& warnings) const {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    for (const auto& w : warnings) out += "warning: " + w + "\n";
    return out;
  }
};

// Artifacts of every finished stage, written as the stages complete.
inline void write_stage(const BamaniResult& r, const std::string& stage, const Dataset& d, const RunConfig& c,
                        const std::string& digest, RunLog& log) {
  const fs::path out(c.output_dir);
  log.add("stage " + stage + " done");
  if (stage == "blacklist") {
    write_file(out / "blacklist.csv", arcs_csv(r.constraints.blacklist(), digest));
  } else if (stage == "ensemble") {
    write_file(out / "arcs_pool.csv", pool_csv(r.pool, digest));
    for (const auto& b : r.bootstraps) {
      const auto name = to_string(b.algorithm);
      write_file(out / ("frequencies_" + name + ".csv"), frequency_csv(b.table, b.threshold, digest));
      log.add(name + ": threshold " + format_double(b.threshold) + ", " + std::to_string(b.averaged.arc_count()) +
              " arcs, " + std::to_string(b.failed_replicates) + " failed replicates");
    }
  } else if (stage == "whitelist") {
    write_file(out / "bic_table.csv", bic_table_csv(r.selection.table, digest));
    write_file(out / "diagnostic.csv", diagnostic_csv(diagnostic_rows(r.selection.steps), digest));
    write_file(out / "whitelist.csv", arcs_csv(r.whitelist.arcs, digest));
    for (const auto& a : r.whitelist.removed) log.add("cycle break: removed " + to_string(a));
  } else if (stage == "final") {
    write_file(out / "network.json", export_json(r.network, run_metadata(c, digest)));
    write_file(out / "network.dot", export_dot(r.network, digest));
    for (const auto& m : r.members) {
      const auto rep = compare_to_ensemble(r.network.dag(), r.strengths, m.dag, m.strengths, m.algorithm,
                                           r.log_strengths, m.log_strengths);
      write_file(out / ("compare_" + to_string(m.algorithm) + ".csv"), comparison_csv(rep, digest));
      for (const auto& l : rep.summary()) log.add(l);
    }
  }
  (void)d;
}

inline int cmd_ensemble(const std::string& config_path, const std::string& out_override, std::size_t workers) {
  auto c = parse_config(config_path);
  if (!out_override.empty()) c.output_dir = out_override;
  const auto digest = c.digest();
  write_file(fs::path(c.output_dir) / "effective_config.json", c.to_json().dump(2) + "\n");
  const auto d = load_data(c);
  RunLog log;
  log.add("config_digest " + digest);
  WarningCapture capture;
  auto flush_log = [&] { write_file(fs::path(c.output_dir) / "run.log", log.text(capture.messages())); };
  try {
    run_bamani(d, c.pipeline(workers), [&](const BamaniResult& r, const std::string& stage) {
      write_stage(r, stage, d, c, digest, log);
    });
  } catch (const StageError& e) {
    log.add(std::string("failed: ") + e.what());
    flush_log();
    throw;
  }
  flush_log();
  std::cout << "wrote " << c.output_dir << "\n";
  return 0;
}

inline int cmd_learn(const std::string& config_path, const std::string& algorithm, const std::string& out_override) {
  auto c = parse_config(config_path);
  if (!out_override.empty()) c.output_dir = out_override;
  const auto alg = algorithm_from_string(algorithm);
  if (!is_top_level(alg)) throw ConfigError("algorithm", to_string(alg) + " is not a structure learner");
  const auto digest = c.digest();
  const auto d = load_data(c);
  const auto constraints = build_blacklist(d, c.pipeline().knowledge, c.leaf_zero_threshold);
  const auto g = learn(alg, d, constraints, c.learner());
  auto net = fit_parameters(g, d);
  ArcStrengths logs;
  const auto strengths = arc_strengths(g, d, &logs);
  net.set_strengths(strengths, logs);
  auto meta = run_metadata(c, digest);
  meta["algorithms"] = nlohmann::json::array({to_string(alg)});
  meta["mode"] = "single";
  const fs::path out(c.output_dir);
  write_file(out / ("learn_" + to_string(alg) + ".json"), export_json(net, meta));
  write_file(out / ("learn_" + to_string(alg) + ".dot"), export_dot(net, digest));
  std::cout << to_string(alg) << ": " << g.arc_count() << " arcs\n";
  return 0;
}

inline int cmd_diagnose(const std::string& config_path, const std::string& out_override, std::size_t workers) {
  auto c = parse_config(config_path);
  if (!out_override.empty()) c.output_dir = out_override;
  const auto digest = c.digest();
  const auto d = load_data(c);
  auto p = c.pipeline(workers);
  const auto constraints = build_blacklist(d, p.knowledge, p.leaf_zero_threshold);
  std::vector<AlgorithmNetwork> members;
  for (auto alg : p.roster) {
    BootstrapOptions opt{p.replicates, derive_seed(p.seed, algorithm_stream(alg)), p.averaging_threshold, workers};
    const auto b = bootstrap_average(alg, d, constraints, p.learner, opt);
    members.push_back(member_network(alg, b.averaged, d));
  }
  const auto pool = build_pool(members);
  const fs::path out(c.output_dir);
  write_file(out / "arcs_pool.csv", pool_csv(pool, digest));
  const auto grid = quantile_grid(pool, p.quantiles);
  const auto rows = diagnostic_curve(d, pool, constraints, grid, p.reference, p.learner, workers);
  write_file(out / "diagnostic.csv", diagnostic_csv(rows, digest));
  std::cout << diagnostic_csv(rows);
  return 0;
}

inline std::string query_file_name(const std::vector<std::string>& targets) {
  std::string name = "query";
  for (const auto& t : targets) name += "_" + t;
  return name + ".csv";
}

inline int cmd_query(const std::string& network_path, const std::string& evidence_text,
                     const std::vector<std::string>& targets, std::size_t n, std::uint64_t seed,
                     const std::string& output, std::size_t workers) {
  const auto loaded = parse_network_json(read_file(network_path));
  const auto evidence = parse_evidence(evidence_text);
  const auto s = conditional_query(loaded.network, evidence, targets, n, seed, workers);
  const std::string digest = loaded.metadata.value("config_digest", std::string());
  const fs::path path = output.empty() ? fs::path(network_path).parent_path() / query_file_name(targets) : fs::path(output);
  write_file(path, digest_line(digest) + to_csv(s));
  std::cout << "effective sample size " << format_double(s.effective_sample_size) << "\n";
  for (const auto& t : targets) std::cout << t << " weighted mean " << format_double(s.weighted_mean(t)) << "\n";
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

inline ArcStrengths strengths_of(const FittedNetwork& net, const std::string& which) {
  ArcStrengths out;
  for (const auto& a : net.arcs()) {
    if (!a.strength) throw DataError(which + " network has no strength for " + to_string(a.arc));
    out[a.arc] = *a.strength;
  }
  return out;
}

inline ArcStrengths log_strengths_of(const FittedNetwork& net) {
  ArcStrengths out;
  for (const auto& a : net.arcs())
    if (a.log_strength) out[a.arc] = *a.log_strength;
  return out;
}

inline int cmd_compare(const std::string& ensemble_path, const std::string& single_path, const std::string& output) {
  const auto ens = parse_network_json(read_file(ensemble_path));
  const auto single = parse_network_json(read_file(single_path));
  AlgorithmId alg = AlgorithmId::HC;
  const auto& algs = single.metadata.value("algorithms", nlohmann::json::array());
  if (algs.size() != 1) throw DataError(single_path + ": metadata does not name a single algorithm");
  alg = algorithm_from_string(algs[0].get<std::string>());
  const auto rep = compare_to_ensemble(ens.network.dag(), strengths_of(ens.network, "ensemble"), single.network.dag(),
                                       strengths_of(single.network, "single"), alg, log_strengths_of(ens.network),
                                       log_strengths_of(single.network));
  const fs::path path =
      output.empty() ? fs::path(ensemble_path).parent_path() / ("compare_" + to_string(alg) + ".csv") : fs::path(output);
  write_file(path, comparison_csv(rep, ens.metadata.value("config_digest", std::string())));
  for (const auto& l : rep.summary()) std::cout << l << "\n";
  return 0;
}

// Bench config: {"seeds": [...], "n_nodes": [...], "n_obs": [...], "expected_degree": 2,
// "algorithms": [...], "replicates": 50, "quantiles": 5, "reference": "TABU", "alpha": 0.05,
// "threshold": "auto", "output_dir": "bench_out"}
inline int cmd_bench(const std::string& config_path, const std::string& out_override, std::size_t workers) {
  const auto j = read_json_file(config_path);
  static const std::set<std::string> known{"seeds",     "n_nodes",   "n_obs",     "expected_degree", "algorithms",
                                           "replicates", "quantiles", "reference", "alpha",           "threshold",
                                           "output_dir"};
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) throw ConfigError(k, "unknown key");
  if (!j.contains("seeds")) throw ConfigError("seeds", "required (no clock-based default)");
  nlohmann::json run = {{"data", "<synthetic>"}, {"seed", 0}};
  for (const char* k : {"algorithms", "replicates", "quantiles", "reference", "alpha", "threshold"})
    if (j.contains(k)) run[k] = j[k];
  const auto rc = parse_config_json(run);

  BenchConfig b;
  auto counts = [&](const char* key) {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < j[key].size(); ++i)
      v.push_back(detail::get_count(j[key][i], std::string(key) + "[" + std::to_string(i) + "]"));
    if (v.empty()) throw ConfigError(key, "must not be empty");
    return v;
  };
  for (const char* k : {"seeds", "n_nodes", "n_obs"})
    if (j.contains(k) && !j[k].is_array()) throw ConfigError(k, "expected an array");
  if (j.contains("n_nodes")) b.n_nodes = counts("n_nodes");
  if (j.contains("n_obs")) b.n_obs = counts("n_obs");
  b.seeds.clear();
  for (auto s : counts("seeds")) b.seeds.push_back(s);
  if (j.contains("expected_degree")) b.expected_degree = detail::get_real(j["expected_degree"], "expected_degree");
  b.pipeline = rc.pipeline(workers);

  fs::path out = out_override.empty() ? fs::path(config_path).parent_path() / j.value("output_dir", "bench_out")
                                      : fs::path(out_override);
  const auto rows = benchmark_suite(b);
  write_file(out / "bench_results.csv", bench_csv(rows, fnv1a_hex(j.dump())));
  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.error.empty();
  std::cout << rows.size() << " rows, " << failed << " failed cells; wrote " << (out / "bench_results.csv").string() << "\n";
  return 0;
}

inline int cmd_simulate(std::size_t nodes, double degree, std::size_t n, std::uint64_t seed, const std::string& output,
                        const std::string& truth_path) {
  const auto gt = random_ground_truth(random_dag(nodes, degree, derive_seed(seed, 1)), derive_seed(seed, 2));
  const auto d = sample_sem(gt, n, derive_seed(seed, 3));
  write_file(output, to_csv(d));
  if (!truth_path.empty()) write_file(truth_path, export_json(gt.sem, {{"seed", seed}, {"mode", "ground_truth"}}));
  std::cout << "wrote " << output << " (" << gt.dag().arc_count() << " true arcs)\n";
  return 0;
}

inline int run(int argc, char** argv) {
  CLI::App app{"bamani: ensemble Bayesian-network structure learning"};
  app.require_subcommand(1);
  std::size_t workers = default_workers();
  app.add_option("--workers", workers, "worker threads (overrides BAMANI_WORKERS)")->check(CLI::PositiveNumber);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress warnings on stderr");

  std::string config, out, algorithm;
  auto* learn_cmd = app.add_subcommand("learn", "learn one algorithm on the full data");
  learn_cmd->add_option("--config", config, "run config JSON")->required()->check(CLI::ExistingFile);
  learn_cmd->add_option("--algorithm,-a", algorithm, "algorithm id")->required();
  learn_cmd->add_option("--out", out, "output directory (overrides output_dir)");

  auto* ens_cmd = app.add_subcommand("ensemble", "run the full ensemble pipeline");
  ens_cmd->add_option("--config", config, "run config JSON")->required()->check(CLI::ExistingFile);
  ens_cmd->add_option("--out", out, "output directory (overrides output_dir)");

  auto* diag_cmd = app.add_subcommand("diagnose", "threshold sweep diagnostic only");
  diag_cmd->add_option("--config", config, "run config JSON")->required()->check(CLI::ExistingFile);
  diag_cmd->add_option("--out", out, "output directory (overrides output_dir)");

  std::string network, evidence, targets_text, output, single;
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  auto* query_cmd = app.add_subcommand("query", "conditional query by likelihood weighting");
  query_cmd->add_option("--network", network, "network.json")->required()->check(CLI::ExistingFile);
  query_cmd->add_option("--evidence", evidence, "NAME=VALUE[,NAME=VALUE...]");
  query_cmd->add_option("--targets", targets_text, "comma-separated target nodes")->required();
  query_cmd->add_option("-n", n, "number of weighted samples");
  query_cmd->add_option("--seed", seed, "sampling seed");
  query_cmd->add_option("--output,-o", output, "output CSV (default query_<targets>.csv next to the network)");

  auto* cmp_cmd = app.add_subcommand("compare", "compare a single-algorithm network with the ensemble");
  cmp_cmd->add_option("--ensemble", network, "ensemble network.json")->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("--single", single, "single-algorithm network JSON (from learn)")->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("--output,-o", output, "output CSV");

  auto* bench_cmd = app.add_subcommand("bench", "synthetic benchmark suite");
  bench_cmd->add_option("--config", config, "bench config JSON")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--out", out, "output directory");

  std::size_t nodes = 8;
  double degree = 2.0;
  std::string truth;
  auto* sim_cmd = app.add_subcommand("simulate", "sample a random linear-Gaussian network to CSV");
  sim_cmd->add_option("--nodes", nodes, "node count");
  sim_cmd->add_option("--degree", degree, "expected degree");
  sim_cmd->add_option("-n", n, "observations");
  sim_cmd->add_option("--seed", seed, "seed")->required();
  sim_cmd->add_option("--output,-o", output, "output CSV")->required();
  sim_cmd->add_option("--truth", truth, "write the true network as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "bamani: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  set_warnings_quiet(quiet);

  try {
    if (*learn_cmd) return cmd_learn(config, algorithm, out);
    if (*ens_cmd) return cmd_ensemble(config, out, workers);
    if (*diag_cmd) return cmd_diagnose(config, out, workers);
    if (*query_cmd) {
      std::vector<std::string> targets;
      for (auto t : detail::split_commas(targets_text))
        if (!detail::trim(t).empty()) targets.emplace_back(detail::trim(t));
      return cmd_query(network, evidence, targets, n, seed, output, workers);
    }
    if (*cmp_cmd) return cmd_compare(network, single, output);
    if (*bench_cmd) return cmd_bench(config, out, workers);
    if (*sim_cmd) return cmd_simulate(nodes, degree, n, seed, output, truth);
  } catch (const ConfigError& e) {
    std::cerr << "bamani: config error: " << e.what() << "\n";
    return 2;
  } catch (const StageError& e) {
    std::cerr << "bamani: stage " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "bamani: error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace bamani::cli
