#pragma once

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bamani/dataset.hpp"
#include "bamani/error.hpp"
#include "bamani/graph.hpp"
#include "bamani/log.hpp"

namespace bamani {

// Pearson correlations between named features. Symmetric with unit diagonal.
class CorrelationMatrix {
 public:
  CorrelationMatrix() = default;
  CorrelationMatrix(std::vector<std::string> names, Eigen::MatrixXd values)
      : names_(std::move(names)), values_(std::move(values)) {}

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const Eigen::MatrixXd& values() const { return values_; }
  double operator()(NodeId i, NodeId j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  NodeId index_of(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw DataError("unknown feature '" + std::string(name) + "'");
    return static_cast<NodeId>(it - names_.begin());
  }

 private:
  std::vector<std::string> names_;
  Eigen::MatrixXd values_;
};

// Maximum-likelihood covariance (divisor n) of the columns of `d`.
inline Eigen::MatrixXd mle_covariance(const Dataset& d) {
  const Eigen::MatrixXd centered = d.values().rowwise() - d.values().colwise().mean();
  Eigen::MatrixXd cov = (centered.adjoint() * centered) / static_cast<double>(std::max<std::size_t>(d.n_obs(), 1));
  return cov;
}

// Constant columns are an error unless `allow_constant`, in which case they
// are reported uncorrelated with everything (learners see them as isolated).
inline CorrelationMatrix correlation_matrix(const Dataset& d, bool allow_constant = false) {
  const Eigen::MatrixXd cov = mle_covariance(d);
  const auto p = cov.rows();
  Eigen::VectorXd sd(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    sd(i) = std::sqrt(std::max(cov(i, i), 0.0));
    if (!(sd(i) > 0.0) || cov(i, i) <= 1e-300) {
      if (!allow_constant) throw DataError("constant column '" + d.name(static_cast<NodeId>(i)) + "'");
      sd(i) = 0.0;
    }
  }
  Eigen::MatrixXd r(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    r(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < p; ++j) {
      double v = (sd(i) > 0.0 && sd(j) > 0.0) ? cov(i, j) / (sd(i) * sd(j)) : 0.0;
      v = std::clamp(v, -1.0, 1.0);
      r(i, j) = r(j, i) = v;
    }
  }
  return CorrelationMatrix(d.names(), std::move(r));
}

// Partial correlation of x and y given z: the correlation of the residual
// covariance of (x, y) after projecting out z. Equal to -W_xy / sqrt(W_xx W_yy)
// with W the inverse of the (x, y, z) submatrix.
inline double partial_correlation(const CorrelationMatrix& corr, NodeId x, NodeId y, std::span<const NodeId> z) {
  if (x == y) throw DegenerateTestError("partial correlation needs distinct variables");
  if (z.empty()) return corr(x, y);
  const auto k = static_cast<Eigen::Index>(z.size());
  Eigen::MatrixXd szz(k, k);
  Eigen::MatrixXd sxz(2, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto zi = z[static_cast<std::size_t>(i)];
    if (zi == x || zi == y) throw DegenerateTestError("conditioning set contains an endpoint");
    sxz(0, i) = corr(x, zi);
    sxz(1, i) = corr(y, zi);
    for (Eigen::Index j = 0; j < k; ++j) szz(i, j) = corr(zi, z[static_cast<std::size_t>(j)]);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(szz);
  const auto diag = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || diag.minCoeff() <= 1e-12 * std::max(1.0, diag.maxCoeff()))
    throw DegenerateTestError("singular conditioning set (collinear variables)");
  const Eigen::MatrixXd proj = sxz * ldlt.solve(sxz.transpose());
  const double vxx = 1.0 - proj(0, 0);
  const double vyy = 1.0 - proj(1, 1);
  const double vxy = corr(x, y) - proj(0, 1);
  if (vxx <= 1e-13 || vyy <= 1e-13)
    throw DegenerateTestError("variable is a linear function of the conditioning set");
  return std::clamp(vxy / std::sqrt(vxx * vyy), -1.0, 1.0);
}

inline double partial_correlation(const CorrelationMatrix& corr, std::string_view x, std::string_view y,
                                  const std::vector<std::string>& z) {
  std::vector<NodeId> zi;
  for (const auto& s : z) zi.push_back(corr.index_of(s));
  return partial_correlation(corr, corr.index_of(x), corr.index_of(y), zi);
}

struct CiResult {
  double statistic = 0.0;  // Student t
  double p_value = 1.0;
  double log_p_value = 0.0;  // natural log, finite where p_value underflows
  long dof = 0;
  double partial_corr = 0.0;
};

namespace detail {

// log of the two-sided t tail, I_x(nu/2, 1/2) with x = nu/(nu + t^2), from
// I_x(a, b) = x^a (1-x)^b / (a B(a, b)) * 2F1(a+b, 1; a+1; x). Only used
// when the tail is far below double range, where x^a is tiny and the series
// converges quickly.
inline double log_t_tail(double t, long dof) {
  const double nu = static_cast<double>(dof), a = nu / 2.0, b = 0.5;
  const double x = nu / (nu + t * t);
  double term = 1.0, sum = 1.0;
  for (int k = 0; k < 100000 && term > 1e-17 * sum; ++k) {
    term *= (a + b + k) / (a + 1.0 + k) * x;
    sum += term;
  }
  const double log1mx = std::log(t * t) - std::log(nu + t * t);
  const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return a * std::log(x) + b * log1mx - std::log(a) - lbeta + std::log(sum);
}

}  // namespace detail

// Exact t-test for a (partial) Pearson correlation `r` with `dof` degrees of
// freedom; two-sided.
inline CiResult t_test_correlation(double r, long dof) {
  if (dof < 1) throw DegenerateTestError("non-positive degrees of freedom (" + std::to_string(dof) + ")");
  CiResult out;
  out.dof = dof;
  out.partial_corr = r;
  if (std::abs(r) >= 1.0) {
    out.statistic = std::copysign(std::numeric_limits<double>::infinity(), r);
    out.p_value = 0.0;
    out.log_p_value = -std::numeric_limits<double>::infinity();
    return out;
  }
  constexpr double kClamp = 1.0 - 1e-12;
  const double rc = std::clamp(r, -kClamp, kClamp);
  out.statistic = rc * std::sqrt(static_cast<double>(dof) / (1.0 - rc * rc));
  if (out.statistic == 0.0) {
    out.p_value = 1.0;
    return out;
  }
  const boost::math::students_t dist(static_cast<double>(dof));
  out.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.statistic))), 0.0, 1.0);
  out.log_p_value = out.p_value > 1e-250 ? std::log(out.p_value) : detail::log_t_tail(out.statistic, dof);
  return out;
}

inline CiResult ci_test(const CorrelationMatrix& corr, std::size_t n_obs, NodeId x, NodeId y,
                        std::span<const NodeId> z) {
  const long dof = static_cast<long>(n_obs) - static_cast<long>(z.size()) - 2;
  if (dof < 1)
    throw DegenerateTestError("non-positive degrees of freedom: n_obs=" + std::to_string(n_obs) +
                              ", |Z|=" + std::to_string(z.size()));
  return t_test_correlation(partial_correlation(corr, x, y, z), dof);
}

namespace detail {

inline void check_ci_args(const Dataset& d, std::string_view x, std::string_view y, const std::vector<std::string>& z) {
  if (x == y) throw DataError("ci_test: x and y must differ");
  for (const auto& s : z)
    if (s == x || s == y) throw DataError("ci_test: conditioning set contains '" + s + "'");
  (void)d.index_of(x), (void)d.index_of(y);
}

inline Dataset sub_dataset(const Dataset& d, const std::vector<std::string>& cols) {
  Eigen::MatrixXd v(d.values().rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) v.col(static_cast<Eigen::Index>(i)) = d.column(cols[i]);
  return Dataset(cols, std::move(v));
}

}  // namespace detail

inline CiResult ci_test(const Dataset& d, std::string_view x, std::string_view y, const std::vector<std::string>& z) {
  detail::check_ci_args(d, x, y, z);
  std::vector<std::string> cols{std::string(x), std::string(y)};
  cols.insert(cols.end(), z.begin(), z.end());
  const auto corr = correlation_matrix(detail::sub_dataset(d, cols));
  std::vector<NodeId> zi(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) zi[i] = i + 2;
  return ci_test(corr, d.n_obs(), 0, 1, zi);
}

struct MutualInformation {
  double value = 0.0;
  bool saturated = false;  // |r| == 1, value is +inf
};

// Gaussian (conditional) mutual information -1/2 ln(1 - r^2).
inline MutualInformation gauss_mi_from_correlation(double r) {
  if (std::abs(r) >= 1.0) return {std::numeric_limits<double>::infinity(), true};
  return {-0.5 * std::log1p(-r * r), false};
}

inline MutualInformation gauss_mi(const Dataset& d, std::string_view x, std::string_view y,
                                  const std::vector<std::string>& z) {
  detail::check_ci_args(d, x, y, z);
  std::vector<std::string> cols{std::string(x), std::string(y)};
  cols.insert(cols.end(), z.begin(), z.end());
  const auto corr = correlation_matrix(detail::sub_dataset(d, cols));
  std::vector<NodeId> zi(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) zi[i] = i + 2;
  return gauss_mi_from_correlation(partial_correlation(corr, 0, 1, zi));
}

// --- least squares -------------------------------------------------------------

struct NodeFit {
  double intercept = 0.0;
  std::vector<double> coefficients;  // aligned with the parent list
  double residual_sd = 0.0;          // MLE divisor n
};

namespace detail {

struct OlsResult {
  NodeFit fit;
  Eigen::VectorXd residuals;
};

inline OlsResult ols(const Dataset& d, NodeId v, const std::vector<NodeId>& parents) {
  const auto n = static_cast<Eigen::Index>(d.n_obs());
  const auto k = static_cast<Eigen::Index>(parents.size());
  if (n == 0) throw DataError("least squares on an empty dataset");
  if (k >= n) throw SingularDesignError("more parents than observations for '" + d.name(v) + "'");
  const Eigen::VectorXd y = d.column(v);
  const double ymean = y.mean();
  OlsResult out;
  if (k == 0) {
    out.fit.intercept = ymean;
    out.residuals = y.array() - ymean;
  } else {
    Eigen::MatrixXd x(n, k);
    Eigen::VectorXd xmean(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      x.col(j) = d.column(parents[static_cast<std::size_t>(j)]);
      xmean(j) = x.col(j).mean();
      x.col(j).array() -= xmean(j);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) throw SingularDesignError("collinear parents for '" + d.name(v) + "'");
    const Eigen::VectorXd yc = y.array() - ymean;
    const Eigen::VectorXd beta = qr.solve(yc);
    out.fit.coefficients.assign(beta.data(), beta.data() + k);
    out.fit.intercept = ymean - xmean.dot(beta);
    out.residuals = yc - x * beta;
  }
  out.fit.residual_sd = std::sqrt(out.residuals.squaredNorm() / static_cast<double>(n));
  return out;
}

inline std::vector<NodeId> resolve(const Dataset& d, const std::vector<std::string>& names) {
  std::vector<NodeId> out;
  for (const auto& s : names) out.push_back(d.index_of(s));
  return out;
}

// Gaussian log-likelihood at the MLE minus (k + 2)/2 ln n. The residual
// variance is floored relative to the node's total variance so that exact
// fits stay finite.
inline double gaussian_bic(std::size_t n, double resid_var, double total_var, std::size_t n_parents) {
  const double floor = total_var > 0.0 ? 1e-12 * total_var : 1e-300;
  const double var = std::max(resid_var, floor);
  const double nd = static_cast<double>(n);
  const double loglik = -0.5 * nd * (std::log(2.0 * std::numbers::pi * var) + 1.0);
  return loglik - 0.5 * static_cast<double>(n_parents + 2) * std::log(nd);
}

}  // namespace detail

inline NodeFit fit_node_ols(const Dataset& d, std::string_view v, const std::vector<std::string>& parents) {
  return detail::ols(d, d.index_of(v), detail::resolve(d, parents)).fit;
}

// Node-level Gaussian BIC from an explicit least-squares fit. Collinear
// parents give -inf.
inline double bic_g_score(const Dataset& d, NodeId v, const std::vector<NodeId>& parents) {
  const auto n = d.n_obs();
  if (parents.size() + 2 > n) throw DataError("too many parents for the number of observations");
  const Eigen::VectorXd y = d.column(v);
  const double total_var = (y.array() - y.mean()).square().sum() / static_cast<double>(n);
  try {
    const auto r = detail::ols(d, v, parents);
    return detail::gaussian_bic(n, r.residuals.squaredNorm() / static_cast<double>(n), total_var, parents.size());
  } catch (const SingularDesignError& e) {
    warn(std::string("bic_g_score: ") + e.what());
    return -std::numeric_limits<double>::infinity();
  }
}

inline double bic_g_score(const Dataset& d, std::string_view v, const std::vector<std::string>& parents) {
  return bic_g_score(d, d.index_of(v), detail::resolve(d, parents));
}

// Sum of node scores, each from its own least-squares fit.
inline double network_bic_g_score(const Dataset& d, const Dag& g) {
  double total = 0.0;
  for (NodeId v = 0; v < g.size(); ++v) total += bic_g_score(d, d.index_of(g.name(v)), [&] {
    std::vector<NodeId> pa;
    for (auto p : g.parents(v)) pa.push_back(d.index_of(g.name(p)));
    return pa;
  }());
  return total;
}

// Gaussian BIC evaluated from the MLE covariance, with a per-(node, parents)
// cache. Used by score-based search; one instance per search.
class GaussianBicScorer {
 public:
  explicit GaussianBicScorer(const Dataset& d) : n_(d.n_obs()), cov_(mle_covariance(d)) {}

  std::size_t n_obs() const { return n_; }

  // `parents` must be sorted ascending.
  double node_score(NodeId v, const std::vector<NodeId>& parents) {
    key_.assign(1, v);
    key_.insert(key_.end(), parents.begin(), parents.end());
    if (auto it = cache_.find(key_); it != cache_.end()) return it->second;
    const double s = compute(v, parents);
    cache_.emplace(key_, s);
    return s;
  }

  double network_score(const Dag& g) {
    double total = 0.0;
    for (NodeId v = 0; v < g.size(); ++v) total += node_score(v, g.parents(v));
    return total;
  }

  std::size_t cache_size() const { return cache_.size(); }

 private:
  double compute(NodeId v, const std::vector<NodeId>& parents) const {
    const auto iv = static_cast<Eigen::Index>(v);
    const double total_var = cov_(iv, iv);
    double resid = total_var;
    if (!parents.empty()) {
      const auto k = static_cast<Eigen::Index>(parents.size());
      Eigen::MatrixXd spp(k, k);
      Eigen::VectorXd spv(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        const auto pi = static_cast<Eigen::Index>(parents[static_cast<std::size_t>(i)]);
        spv(i) = cov_(pi, iv);
        for (Eigen::Index j = 0; j < k; ++j) spp(i, j) = cov_(pi, static_cast<Eigen::Index>(parents[static_cast<std::size_t>(j)]));
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(spp);
      const auto diag = ldlt.vectorD();
      if (ldlt.info() != Eigen::Success || diag.minCoeff() <= 1e-12 * std::max(spp.diagonal().maxCoeff(), 1e-300))
        return -std::numeric_limits<double>::infinity();
      resid = total_var - spv.dot(ldlt.solve(spv));
    }
    return detail::gaussian_bic(n_, resid, total_var, parents.size());
  }

  std::size_t n_;
  Eigen::MatrixXd cov_;
  std::map<std::vector<NodeId>, double> cache_;
  std::vector<NodeId> key_;
};

}  // namespace bamani
