#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "seldoor/error.hpp"
#include "seldoor/graph.hpp"
#include "seldoor/linalg.hpp"

namespace seldoor {

// Linear structural system over an Admg:
//   X = coefficients * X + u,  u with mean `intercepts` and Var(u) = sigma.
// coefficients(i, j) carries the edge j -> i, so the matrix is strictly
// lower triangular in the causal ordering; sigma is positive definite with
// off-diagonal support exactly on the bidirected edges.
struct SemModel {
  Admg graph;
  Eigen::MatrixXd coefficients;
  Eigen::MatrixXd sigma;
  Eigen::VectorXd intercepts;
};

inline SemModel make_model(Admg graph, Eigen::MatrixXd coefficients, Eigen::MatrixXd sigma,
                           Eigen::VectorXd intercepts) {
  return SemModel{std::move(graph), std::move(coefficients), std::move(sigma), std::move(intercepts)};
}

// Model with all coefficients and covariances zero except the given edges,
// unit error variances, zero intercepts. Convenience for tests and docs.
inline SemModel unit_model(Admg graph) {
  const int n = graph.vertex_count();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : graph.directed()) a(e.to, e.from) = 1.0;
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(n, n);
  return make_model(std::move(graph), std::move(a), std::move(s), Eigen::VectorXd::Zero(n));
}

inline ValidationResult validate_model(const SemModel& m) {
  auto gr = validate(m.graph);
  if (!gr.ok) return gr;
  const int n = m.graph.vertex_count();
  const auto entry = [&](int i, int j) {
    return "(" + m.graph.name(i) + ", " + m.graph.name(j) + ")";
  };
  if (m.coefficients.rows() != n || m.coefficients.cols() != n) {
    return invalid(Errc::not_lower_triangular, "coefficient matrix is not " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (m.sigma.rows() != n || m.sigma.cols() != n) {
    return invalid(Errc::sigma_not_pd, "error covariance is not " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (m.intercepts.size() != n) {
    return invalid(Errc::edge_coefficient_mismatch, "intercept vector length mismatch");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(m.coefficients(i, j))) {
        return invalid(Errc::edge_coefficient_mismatch, "non-finite coefficient at " + entry(i, j));
      }
      if (j >= i && m.coefficients(i, j) != 0.0) {
        return invalid(Errc::not_lower_triangular,
                       "coefficient at " + entry(i, j) + " sits on or above the diagonal");
      }
      // Exact-zero support check: a coefficient may be nonzero only on an
      // edge of the graph.
      if (j < i && m.coefficients(i, j) != 0.0 && !m.graph.has_directed(j, i)) {
        return invalid(Errc::edge_coefficient_mismatch,
                       "nonzero coefficient at " + entry(i, j) + " without the edge " +
                           m.graph.name(j) + " -> " + m.graph.name(i));
      }
    }
    if (!std::isfinite(m.intercepts(i))) {
      return invalid(Errc::edge_coefficient_mismatch, "non-finite intercept for " + m.graph.name(i));
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(m.sigma(i, j))) {
        return invalid(Errc::sigma_not_pd, "non-finite covariance at " + entry(i, j));
      }
      if (m.sigma(i, j) != m.sigma(j, i)) {
        return invalid(Errc::sigma_not_pd, "error covariance not symmetric at " + entry(i, j));
      }
      if (i != j && m.sigma(i, j) != 0.0 && !m.graph.has_bidirected(i, j)) {
        return invalid(Errc::edge_coefficient_mismatch,
                       "nonzero error covariance at " + entry(i, j) + " without the edge " +
                           m.graph.name(i) + " <-> " + m.graph.name(j));
      }
    }
  }
  if (!detail::is_positive_definite<double>(m.sigma, kPivotTol)) {
    return invalid(Errc::sigma_not_pd, "error covariance is not positive definite");
  }
  return valid();
}

// First and second moments of the observed variables. cov is symmetric to
// the last bit: the lower triangle is computed and mirrored.
struct MomentSet {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline MomentSet moments(const SemModel& m) {
  MomentSet out;
  detail::unit_lower_solve_into<double>(m.coefficients, m.intercepts, out.mean);
  const Eigen::MatrixXd b = detail::unit_lower_inverse<double>(m.coefficients);
  Eigen::MatrixXd tmp = b * m.sigma;
  const int n = m.graph.vertex_count();
  out.cov.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += tmp(i, k) * b(j, k);
      out.cov(i, j) = acc;
      out.cov(j, i) = acc;
    }
  }
  return out;
}

// Total effect of j on i: the (i, j) entry of (I - A)^{-1}, i.e. the sum of
// coefficient products over all directed paths from j to i.
inline double total_effect(const SemModel& m, int i, int j) {
  detail::check_vertex(m.graph, i, "outcome");
  detail::check_vertex(m.graph, j, "treatment");
  if (i == j) throw Error(Errc::outcome_in_set, "total effect of a vertex on itself");
  return detail::controlled_effect_entry<double>(m.coefficients, 0, j, i);
}

// Total effect of j on i after deleting every edge into a member of z.
inline double controlled_total_effect(const SemModel& m, int i, int j, const std::vector<int>& z) {
  detail::check_vertex(m.graph, i, "outcome");
  detail::check_vertex(m.graph, j, "treatment");
  if (i == j) throw Error(Errc::outcome_in_set, "total effect of a vertex on itself");
  const VertexMask zm = detail::mask_of(z, m.graph, "intervention vertex");
  if (zm & (detail::bit(i) | detail::bit(j))) {
    throw Error(Errc::query_vertex_in_z, "intervention set contains a query vertex");
  }
  return detail::controlled_effect_entry<double>(m.coefficients, zm, j, i);
}

// Rewrite of X_i over the explanatory set s: X_i equals
//   sum_{j in s} coeffs_on_s[j] X_j + sum_{k in AN(i) - s} coeffs_on_errors[k] u_k + u_i,
// where coeffs_on_s[j] is the total effect of j controlled for the rest of
// s, and coeffs_on_errors[k] the total effect of k controlled for all of s.
struct AncestralExpansion {
  std::map<int, double> coeffs_on_s;
  std::map<int, double> coeffs_on_errors;
};

inline AncestralExpansion ancestral_expansion(const SemModel& m, int i, const std::vector<int>& s) {
  detail::check_vertex(m.graph, i, "outcome");
  VertexMask sm = 0;
  for (int v : s) {
    detail::check_vertex(m.graph, v, "explanatory vertex");
    if (v == i) throw Error(Errc::outcome_in_set, "explanatory set contains the outcome");
    if (sm & detail::bit(v)) throw Error(Errc::duplicate_edge, "duplicate explanatory vertex " + m.graph.name(v));
    sm |= detail::bit(v);
  }
  AncestralExpansion out;
  ColumnVector<double> col;
  for (int j : s) {
    detail::controlled_effect_column_into<double>(m.coefficients, sm & ~detail::bit(j), j, col);
    out.coeffs_on_s[j] = col(i);
  }
  const VertexMask an_i = detail::ancestor_masks(m.graph)[static_cast<std::size_t>(i)];
  for (int k = 0; k < m.graph.vertex_count(); ++k) {
    if (!(an_i & detail::bit(k)) || (sm & detail::bit(k))) continue;
    detail::controlled_effect_column_into<double>(m.coefficients, sm, k, col);
    out.coeffs_on_errors[k] = col(i);
  }
  return out;
}

}  // namespace seldoor
