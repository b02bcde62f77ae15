#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "seldoor/error.hpp"
#include "seldoor/sem.hpp"

namespace seldoor {

// Best linear predictor with intercept. `coefficients` aligns with
// `regressors` (ascending vertex index).
struct RegressionResult {
  std::vector<int> regressors;
  std::vector<double> coefficients;
  double intercept = 0.0;
  double residual_variance = 0.0;

  double coefficient_on(int vertex) const {
    for (std::size_t k = 0; k < regressors.size(); ++k) {
      if (regressors[k] == vertex) return coefficients[k];
    }
    throw Error(Errc::unknown_vertex, "vertex " + std::to_string(vertex) + " is not a regressor");
  }
};

namespace detail {

inline std::vector<int> sorted_unique_set(const std::vector<int>& s) {
  std::vector<int> out = s;
  std::sort(out.begin(), out.end());
  return out;
}

// Population regression from a moment set; shared by the model-level entry
// point and the analysis layer (which reuses one moment computation).
inline RegressionResult regress_from_moments(const MomentSet& mom, int i,
                                             const std::vector<int>& s_sorted) {
  const int k = static_cast<int>(s_sorted.size());
  RegressionResult out;
  out.regressors = s_sorted;
  if (k == 0) {
    out.intercept = mom.mean(i);
    out.residual_variance = mom.cov(i, i);
    return out;
  }
  SquareMatrix<double> v(k, k);
  ColumnVector<double> c(k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) v(a, b) = mom.cov(s_sorted[a], s_sorted[b]);
    c(a) = mom.cov(s_sorted[a], i);
  }
  ColumnVector<double> beta;
  if (!ldlt_solve<double>(v, c, kPivotTol, beta)) {
    throw Error(Errc::singular_design, "regressor covariance is numerically singular");
  }
  out.coefficients.assign(beta.data(), beta.data() + k);
  double mean_part = 0.0;
  double quad = 0.0;
  double cross = 0.0;
  for (int a = 0; a < k; ++a) {
    mean_part += beta(a) * mom.mean(s_sorted[a]);
    cross += beta(a) * c(a);
    for (int b = 0; b < k; ++b) quad += beta(a) * v(a, b) * beta(b);
  }
  out.intercept = mom.mean(i) - mean_part;
  out.residual_variance = mom.cov(i, i) - 2.0 * cross + quad;
  return out;
}

}  // namespace detail

// Coefficients of the population regression of X_i on {X_k : k in s} with an
// intercept: Var(X_s)^{-1} Cov(X_s, X_i). s may be empty (intercept-only).
inline RegressionResult partial_regression(const SemModel& m, int i, const std::vector<int>& s) {
  detail::check_vertex(m.graph, i, "outcome");
  for (int v : s) {
    detail::check_vertex(m.graph, v, "regressor");
    if (v == i) throw Error(Errc::outcome_in_set, "regressors contain the outcome " + m.graph.name(v));
  }
  const auto s_sorted = detail::sorted_unique_set(s);
  for (std::size_t k = 1; k < s_sorted.size(); ++k) {
    if (s_sorted[k] == s_sorted[k - 1]) {
      throw Error(Errc::singular_design, "duplicate regressor " + m.graph.name(s_sorted[k]));
    }
  }
  return detail::regress_from_moments(moments(m), i, s_sorted);
}

// Diagnostics for the defining property of the regression: the residual has
// mean zero and is uncorrelated with every regressor. Also re-derives the
// coefficients through the intercept-augmented normal equations on raw
// moments as an independent route.
struct ResidualChecks {
  double mean_residual = 0.0;
  std::vector<double> cov_regressor_residual;
  double max_abs_cov = 0.0;
  double cross_route_max_diff = 0.0;
};

inline ResidualChecks residual_checks(const SemModel& m, int i, const std::vector<int>& s) {
  const auto mom = moments(m);
  const auto s_sorted = detail::sorted_unique_set(s);
  const auto reg = detail::regress_from_moments(mom, i, s_sorted);
  const int k = static_cast<int>(s_sorted.size());
  ResidualChecks out;
  double bm = 0.0;
  for (int a = 0; a < k; ++a) bm += reg.coefficients[a] * mom.mean(s_sorted[a]);
  out.mean_residual = mom.mean(i) - reg.intercept - bm;
  for (int a = 0; a < k; ++a) {
    double cov = mom.cov(s_sorted[a], i);
    for (int b = 0; b < k; ++b) cov -= reg.coefficients[b] * mom.cov(s_sorted[a], s_sorted[b]);
    out.cov_regressor_residual.push_back(cov);
    out.max_abs_cov = std::max(out.max_abs_cov, std::abs(cov));
  }
  // Second route: solve E[X+ X+^T] b = E[X+ X_i] with the constant regressor
  // appended, from raw (uncentered) moments.
  SquareMatrix<double> raw(k + 1, k + 1);
  ColumnVector<double> rhs(k + 1);
  raw(0, 0) = 1.0;
  rhs(0) = mom.mean(i);
  for (int a = 0; a < k; ++a) {
    raw(0, a + 1) = mom.mean(s_sorted[a]);
    raw(a + 1, 0) = mom.mean(s_sorted[a]);
    rhs(a + 1) = mom.cov(s_sorted[a], i) + mom.mean(s_sorted[a]) * mom.mean(i);
    for (int b = 0; b < k; ++b) {
      raw(a + 1, b + 1) = mom.cov(s_sorted[a], s_sorted[b]) + mom.mean(s_sorted[a]) * mom.mean(s_sorted[b]);
    }
  }
  ColumnVector<double> full;
  if (!detail::ldlt_solve<double>(raw, rhs, kPivotTol, full)) {
    throw Error(Errc::singular_design, "augmented normal equations are numerically singular");
  }
  out.cross_route_max_diff = std::abs(full(0) - reg.intercept);
  for (int a = 0; a < k; ++a) {
    out.cross_route_max_diff = std::max(out.cross_route_max_diff, std::abs(full(a + 1) - reg.coefficients[a]));
  }
  return out;
}

}  // namespace seldoor
