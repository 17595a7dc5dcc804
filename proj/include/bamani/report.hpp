#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "bamani/pipeline.hpp"

namespace bamani {

// --- diagnostic curve ------------------------------------------------------------

struct DiagnosticRow {
  double threshold = 0.0;
  std::size_t whitelist_size = 0;  // |W_temp(Q_j)|
  std::size_t connectivity = 0;    // arcs in G'_j
};

inline std::vector<DiagnosticRow> diagnostic_rows(const std::vector<SweepStep>& steps) {
  std::vector<DiagnosticRow> out;
  for (const auto& s : steps) out.push_back({s.threshold, s.candidates.size(), s.learned.arc_count()});
  return out;
}

inline std::vector<DiagnosticRow> diagnostic_curve(const Dataset& d, const ArcPool& pool,
                                                   const ConstraintSpec& constraints, const QuantileGrid& grid,
                                                   AlgorithmId reference, const LearnerConfig& cfg,
                                                   std::size_t workers = 1) {
  return diagnostic_rows(sweep(d, pool, constraints, grid, reference, cfg, workers));
}

// --- comparison with the ensemble --------------------------------------------------

enum class StrengthClass { StrongerInEnsemble, StrongerInSingle, Equal, UniqueToAlgorithm, UniqueToEnsemble };

inline std::string to_string(StrengthClass c) {
  switch (c) {
    case StrengthClass::StrongerInEnsemble: return "stronger_in_ensemble";
    case StrengthClass::StrongerInSingle: return "stronger_in_single";
    case StrengthClass::Equal: return "equal";
    case StrengthClass::UniqueToAlgorithm: return "unique_to_algorithm";
    case StrengthClass::UniqueToEnsemble: return "unique_to_ensemble";
  }
  return "equal";
}

struct ComparedArc {
  Arc arc;
  std::optional<double> strength_single;
  std::optional<double> strength_ensemble;
  StrengthClass cls;
};

struct ComparisonReport {
  AlgorithmId algorithm = AlgorithmId::HC;
  std::size_t common = 0;
  std::size_t unique_to_algorithm = 0;
  std::size_t unique_to_ensemble = 0;
  std::size_t stronger_in_ensemble = 0;
  std::size_t stronger_in_single = 0;
  std::size_t equal = 0;
  std::vector<ComparedArc> arcs;  // sorted by arc

  double percent(std::size_t count) const {
    return common == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(common);
  }

  std::vector<std::string> summary() const {
    auto line = [&](std::size_t k, const char* what) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "%zu arcs (%.1f%%) %s", k, percent(k), what);
      return std::string(buf);
    };
    return {to_string(algorithm) + ": " + std::to_string(common) + " common, " + std::to_string(unique_to_algorithm) +
                " unique to algorithm, " + std::to_string(unique_to_ensemble) + " unique to ensemble",
            line(stronger_in_ensemble, "stronger in ensemble"), line(stronger_in_single, "stronger in single"),
            line(equal, "equal")};
  }
};

// Smaller p-value is the stronger arc. Equal p-values (typically both
// underflowed to 0) are split by the log strengths when both are given;
// remaining equality is bitwise.
inline ComparisonReport compare_to_ensemble(const Dag& ensemble, const ArcStrengths& ensemble_strengths,
                                            const Dag& single, const ArcStrengths& single_strengths, AlgorithmId alg,
                                            const ArcStrengths& ensemble_log = {}, const ArcStrengths& single_log = {}) {
  if (ensemble.names() != single.names()) throw GraphError("compare_to_ensemble: networks have different nodes");
  auto strength = [](const ArcStrengths& s, const Arc& a) -> double {
    auto it = s.find(a);
    if (it == s.end()) throw DataError("no strength recorded for " + to_string(a));
    return it->second;
  };
  ComparisonReport r;
  r.algorithm = alg;
  const auto e = ensemble.arc_set(), s = single.arc_set();
  for (const auto& a : s) {
    if (!e.count(a)) {
      r.arcs.push_back({a, strength(single_strengths, a), std::nullopt, StrengthClass::UniqueToAlgorithm});
      ++r.unique_to_algorithm;
      continue;
    }
    double ps = strength(single_strengths, a), pe = strength(ensemble_strengths, a);
    ++r.common;
    const auto ls = single_log.find(a), le = ensemble_log.find(a);
    const bool by_log = ps == pe && ls != single_log.end() && le != ensemble_log.end();
    StrengthClass c = StrengthClass::Equal;
    const double ke = by_log ? le->second : pe, ks = by_log ? ls->second : ps;
    if (ke < ks)
      c = StrengthClass::StrongerInEnsemble, ++r.stronger_in_ensemble;
    else if (ks < ke)
      c = StrengthClass::StrongerInSingle, ++r.stronger_in_single;
    else
      ++r.equal;
    r.arcs.push_back({a, ps, pe, c});
  }
  for (const auto& a : e)
    if (!s.count(a)) {
      r.arcs.push_back({a, std::nullopt, strength(ensemble_strengths, a), StrengthClass::UniqueToEnsemble});
      ++r.unique_to_ensemble;
    }
  std::sort(r.arcs.begin(), r.arcs.end(), [](const auto& x, const auto& y) { return x.arc < y.arc; });
  return r;
}

// --- CSV writers -------------------------------------------------------------------
// Every artifact starts with a comment line naming the config digest.

inline std::string digest_line(const std::string& digest) { return digest.empty() ? "" : "# config_digest=" + digest + "\n"; }

inline std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

inline std::string comparison_csv(const ComparisonReport& r, const std::string& digest = "") {
  std::string out = digest_line(digest) + "arc,from,to,strength_single,strength_ensemble,class\n";
  for (const auto& a : r.arcs)
    out += to_string(a.arc) + "," + a.arc.from + "," + a.arc.to + "," + format_optional(a.strength_single) + "," +
           format_optional(a.strength_ensemble) + "," + to_string(a.cls) + "\n";
  return out;
}

inline std::string diagnostic_csv(const std::vector<DiagnosticRow>& rows, const std::string& digest = "") {
  std::string out = digest_line(digest) + "threshold,whitelist_size,connectivity\n";
  for (const auto& r : rows)
    out += format_double(r.threshold) + "," + std::to_string(r.whitelist_size) + "," + std::to_string(r.connectivity) + "\n";
  return out;
}

inline std::string pool_csv(const ArcPool& pool, const std::string& digest = "") {
  std::string out = digest_line(digest) + "from,to,algorithm,strength\n";
  for (const auto& r : pool.records())
    out += r.from + "," + r.to + "," + to_string(r.algorithm) + "," + format_double(r.strength) + "\n";
  return out;
}

inline std::string bic_table_csv(const std::vector<BicRow>& rows, const std::string& digest = "") {
  std::string out = digest_line(digest) + "feature,j,Q_j,n_parents,L1,BIC\n";
  for (const auto& r : rows)
    out += r.feature + "," + std::to_string(r.j) + "," + format_double(r.threshold) + "," + std::to_string(r.n_parents) +
           "," + format_double(r.l1) + "," + format_double(r.bic) + "\n";
  return out;
}

inline std::string arcs_csv(const ArcSet& arcs, const std::string& digest = "") {
  std::string out = digest_line(digest) + "from,to\n";
  for (const auto& a : arcs) out += a.from + "," + a.to + "\n";
  return out;
}

inline std::string frequency_csv(const ArcFrequencyTable& t, double threshold, const std::string& digest = "") {
  std::string out = digest_line(digest) + "from,to,frequency,threshold\n";
  for (const auto& [a, f] : t.entries())
    if (f > 0.0) out += a.from + "," + a.to + "," + format_double(f) + "," + format_double(threshold) + "\n";
  return out;
}

}  // namespace bamani
