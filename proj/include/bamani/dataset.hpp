#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bamani/error.hpp"
#include "bamani/log.hpp"
#include "bamani/rng.hpp"

namespace bamani {

using NodeId = std::size_t;

// Column-named matrix of observations: one row per observation, one column
// per feature. Every cell is finite and the names are unique.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<std::string> names, Eigen::MatrixXd values)
      : names_(std::move(names)), values_(std::move(values)) {
    if (static_cast<Eigen::Index>(names_.size()) != values_.cols())
      throw DataError("dataset has " + std::to_string(names_.size()) + " names but " +
                      std::to_string(values_.cols()) + " columns");
    std::unordered_set<std::string> seen;
    for (const auto& name : names_) {
      if (name.empty()) throw DataError("empty feature name");
      if (!seen.insert(name).second) throw DataError("duplicate feature name '" + name + "'");
    }
    for (Eigen::Index c = 0; c < values_.cols(); ++c)
      for (Eigen::Index r = 0; r < values_.rows(); ++r)
        if (!std::isfinite(values_(r, c)))
          throw DataError("non-finite value at row " + std::to_string(r) + ", column '" +
                          names_[static_cast<std::size_t>(c)] + "'");
  }

  std::size_t n_obs() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t n_features() const { return names_.size(); }

  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(NodeId i) const { return names_.at(i); }
  const Eigen::MatrixXd& values() const { return values_; }

  bool has_feature(std::string_view name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
  }

  NodeId index_of(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw DataError("unknown feature '" + std::string(name) + "'");
    return static_cast<NodeId>(it - names_.begin());
  }

  auto column(NodeId i) const { return values_.col(static_cast<Eigen::Index>(i)); }
  auto column(std::string_view name) const { return column(index_of(name)); }

  // Dataset built from the given source rows (repeats allowed).
  Dataset select_rows(const std::vector<std::size_t>& rows) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), values_.cols());
    for (std::size_t r = 0; r < rows.size(); ++r)
      out.row(static_cast<Eigen::Index>(r)) = values_.row(static_cast<Eigen::Index>(rows[r]));
    Dataset d;
    d.names_ = names_;
    d.values_ = std::move(out);
    return d;
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.names_ == b.names_ && a.values_.rows() == b.values_.rows() &&
           a.values_.cols() == b.values_.cols() && a.values_ == b.values_;
  }

 private:
  std::vector<std::string> names_;
  Eigen::MatrixXd values_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

inline std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

}  // namespace detail

// Locale-independent shortest round-trip formatting.
inline std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

inline Dataset parse_csv(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty file (missing header)");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::vector<std::string> names;
  for (auto cell : detail::split_commas(line)) names.push_back(detail::unquote(cell));
  {
    std::unordered_set<std::string> seen;
    for (const auto& n : names) {
      if (n.empty()) throw DataError(source + ": empty header name");
      if (!seen.insert(n).second) throw DataError(source + ": duplicate header name '" + n + "'");
    }
  }

  std::vector<double> cells;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto parts = detail::split_commas(line);
    if (parts.size() != names.size())
      throw DataError(source + ": line " + std::to_string(line_no) + " has " +
                      std::to_string(parts.size()) + " cells, expected " + std::to_string(names.size()));
    for (std::size_t c = 0; c < parts.size(); ++c) {
      const auto cell = parts[c];
      const auto where = source + ": line " + std::to_string(line_no) + ", column '" + names[c] + "'";
      if (cell.empty()) throw DataError(where + ": missing value");
      double value = 0.0;
      const char* first = cell.data();
      if (*first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw DataError(where + ": non-numeric value '" + std::string(cell) + "'");
      if (!std::isfinite(value)) throw DataError(where + ": non-finite value '" + std::string(cell) + "'");
      cells.push_back(value);
    }
    ++rows;
  }
  if (rows == 0) throw DataError(source + ": no data rows");

  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(names.size()));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < names.size(); ++c)
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cells[r * names.size() + c];

  if (rows < names.size() + 3)
    warn(source + ": only " + std::to_string(rows) + " observations for " + std::to_string(names.size()) +
         " features; conditional independence tests on large conditioning sets will lack degrees of freedom");
  return Dataset(std::move(names), std::move(values));
}

inline Dataset load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_csv(in, path);
}

inline std::string to_csv(const Dataset& d) {
  std::string out;
  for (std::size_t c = 0; c < d.n_features(); ++c) {
    if (c) out += ',';
    out += d.name(c);
  }
  out += '\n';
  for (std::size_t r = 0; r < d.n_obs(); ++r) {
    for (std::size_t c = 0; c < d.n_features(); ++c) {
      if (c) out += ',';
      out += format_double(d.values()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    }
    out += '\n';
  }
  return out;
}

// Fraction of observations of `feature` exactly equal to zero.
inline double zero_fraction(const Dataset& d, std::string_view feature) {
  const auto col = d.column(feature);
  if (col.size() == 0) return 0.0;
  const auto zeros = (col.array() == 0.0).count();
  return static_cast<double>(zeros) / static_cast<double>(col.size());
}

// Same-size resample with replacement; deterministic in `seed`.
inline Dataset bootstrap_resample(const Dataset& d, std::uint64_t seed) {
  if (d.n_obs() == 0) throw DataError("cannot resample an empty dataset");
  Rng rng(seed);
  std::vector<std::size_t> rows(d.n_obs());
  for (auto& r : rows) r = static_cast<std::size_t>(rng.uniform_index(d.n_obs()));
  return d.select_rows(rows);
}

// Centre each column and scale to unit sample sd (divisor n-1). Constant
// columns are an error unless `keep_constant`, which maps them to zeros.
inline Dataset standardize(const Dataset& d, bool keep_constant = false) {
  Eigen::MatrixXd v = d.values();
  const auto n = v.rows();
  if (n < 2) throw DataError("standardize needs at least two observations");
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    const double mean = v.col(c).mean();
    v.col(c).array() -= mean;
    const double sd = std::sqrt(v.col(c).squaredNorm() / static_cast<double>(n - 1));
    if (sd == 0.0) {
      if (!keep_constant) throw DataError("cannot standardize constant column '" + d.name(static_cast<NodeId>(c)) + "'");
      v.col(c).setZero();
      continue;
    }
    v.col(c) /= sd;
  }
  return Dataset(d.names(), std::move(v));
}

}  // namespace bamani
