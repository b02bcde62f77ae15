#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "seldoor/criteria.hpp"
#include "seldoor/regression.hpp"
#include "seldoor/sem.hpp"

namespace seldoor {

struct AdjustmentQuery {
  int outcome = 0;
  int treatment = 0;
  std::vector<int> z;
  // Evaluate the conditioned-descendant clause against the literal set z - k
  // instead of (z + treatment) - k.
  bool strict = false;
};

// One row of the bias ledger: the residual confounding of p (given the rest
// of the explanatory set) times the treatment's controlled effect on p.
// The ledger total is -sum(gamma_ip * tau_pj).
struct BiasTerm {
  int p = 0;
  double gamma_ip = 0.0;
  double tau_pj = 0.0;
};

struct EffectReport {
  CriterionResult criterion;
  double beta = 0.0;
  double tau = 0.0;
  double gamma = 0.0;
  double total_effect_unadjusted = 0.0;
  S1S2 partition;
  // Present when z blocks every back-door path treatment -> outcome; then
  // gamma must equal bias_rhs.
  bool backdoor_blocked = false;
  std::optional<double> bias_rhs;
  std::vector<BiasTerm> ledger;
};

class PreconditionError : public Error {
 public:
  PreconditionError(std::string what, Path witness)
      : Error(Errc::precondition_not_met, std::move(what)), witness_path(std::move(witness)) {}
  Path witness_path;
};

namespace detail {

inline std::vector<int> explanatory_set(const AdjustmentQuery& q) {
  std::vector<int> s = q.z;
  s.push_back(q.treatment);
  std::sort(s.begin(), s.end());
  return s;
}

struct BiasLedger {
  double rhs = 0.0;
  std::vector<BiasTerm> terms;
};

// Ledger of the bias identity. Requires j in s2 (equivalent to z blocking
// all back-door paths from the treatment); the caller has checked that.
inline BiasLedger bias_ledger(const SemModel& m, const AdjustmentQuery& q,
                              const std::vector<int>& s, const S1S2& parts,
                              const RegressionResult& reg_on_s) {
  BiasLedger out;
  for (int p : parts.s1) {
    std::vector<int> rest;
    for (int v : s) {
      if (v != p) rest.push_back(v);
    }
    const double beta_ip = reg_on_s.coefficient_on(p);
    const double tau_ip = controlled_total_effect(m, q.outcome, p, rest);
    std::vector<int> s2_minus_j;
    for (int v : parts.s2) {
      if (v != q.treatment) s2_minus_j.push_back(v);
    }
    const double tau_pj = controlled_total_effect(m, p, q.treatment, s2_minus_j);
    out.terms.push_back({p, beta_ip - tau_ip, tau_pj});
    out.rhs -= (beta_ip - tau_ip) * tau_pj;
  }
  return out;
}

}  // namespace detail

// Full analysis of one adjustment query: the criterion verdict, the
// regression coefficient on the treatment, the controlled total effect, the
// post-treatment bias gamma = beta - tau, and (whenever z blocks all
// back-door paths) the ledger that reproduces gamma from the s1 members.
inline EffectReport identify(const SemModel& m, const AdjustmentQuery& q,
                             int vertex_cap = kDefaultVertexCap) {
  detail::check_query(m.graph, q.z, q.treatment, q.outcome);
  EffectReport out;
  out.criterion = selective_door_criterion(m.graph, q.z, q.treatment, q.outcome, q.strict, vertex_cap);
  const auto s = detail::explanatory_set(q);
  const auto mom = moments(m);
  const auto reg = detail::regress_from_moments(mom, q.outcome, s);
  out.beta = reg.coefficient_on(q.treatment);
  out.tau = controlled_total_effect(m, q.outcome, q.treatment, q.z);
  out.gamma = out.beta - out.tau;
  out.total_effect_unadjusted = total_effect(m, q.outcome, q.treatment);
  out.partition = partition_s1_s2(m.graph, s, q.outcome, vertex_cap);
  const auto desc = detail::descendant_masks(m.graph);
  const VertexMask zm = detail::mask_of(q.z, m.graph, "adjustment vertex");
  out.backdoor_blocked =
      !detail::first_open_backdoor(m.graph, q.treatment, q.outcome, zm, desc, vertex_cap).has_value();
  if (out.backdoor_blocked) {
    auto ledger = detail::bias_ledger(m, q, s, out.partition, reg);
    out.bias_rhs = ledger.rhs;
    out.ledger = std::move(ledger.terms);
  }
  return out;
}

// The bias identity on its own. Throws precondition_not_met (with the
// offending path as witness) unless z blocks every back-door path from the
// treatment to the outcome.
struct BiasDecomposition {
  double gamma = 0.0;
  double rhs = 0.0;
  double identity_gap = 0.0;
  S1S2 partition;
  std::vector<BiasTerm> terms;
};

inline BiasDecomposition bias_decomposition(const SemModel& m, const AdjustmentQuery& q,
                                            int vertex_cap = kDefaultVertexCap) {
  detail::check_query(m.graph, q.z, q.treatment, q.outcome);
  const auto desc = detail::descendant_masks(m.graph);
  const VertexMask zm = detail::mask_of(q.z, m.graph, "adjustment vertex");
  if (auto open = detail::first_open_backdoor(m.graph, q.treatment, q.outcome, zm, desc, vertex_cap)) {
    // Format before moving: argument evaluation order is unspecified.
    std::string msg = "adjustment set leaves a back-door path open: " + format_path(m.graph, *open);
    throw PreconditionError(std::move(msg), std::move(*open));
  }
  const auto s = detail::explanatory_set(q);
  const auto mom = moments(m);
  const auto reg = detail::regress_from_moments(mom, q.outcome, s);
  BiasDecomposition out;
  out.partition = partition_s1_s2(m.graph, s, q.outcome, vertex_cap);
  auto ledger = detail::bias_ledger(m, q, s, out.partition, reg);
  out.gamma = reg.coefficient_on(q.treatment) - controlled_total_effect(m, q.outcome, q.treatment, q.z);
  out.rhs = ledger.rhs;
  out.terms = std::move(ledger.terms);
  out.identity_gap = out.gamma - out.rhs;
  return out;
}

// Corollary checks: each evaluates its graphical precondition and, when it
// holds, the regression value it pins down.
struct CorollaryReport {
  CriterionResult precondition;
  double beta = 0.0;
  double expected = 0.0;
};

// No unblocked path at all between treatment and outcome => beta is zero.
inline CorollaryReport corollary_zero_effect(const SemModel& m, const AdjustmentQuery& q,
                                             int vertex_cap = kDefaultVertexCap) {
  detail::check_query(m.graph, q.z, q.treatment, q.outcome);
  detail::check_cap(m.graph, vertex_cap);
  CorollaryReport out;
  const auto desc = detail::descendant_masks(m.graph);
  const VertexMask zm = detail::mask_of(q.z, m.graph, "adjustment vertex");
  const auto steps = detail::step_lists(m.graph);
  detail::for_each_path(steps, q.treatment, q.outcome, [&](const Path& p) {
    if (!out.precondition.satisfied) return;
    if (!detail::blocked_by(p, zm, desc)) {
      out.precondition.satisfied = false;
      out.precondition.clause = "unblocked-path";
      out.precondition.witness_path = p;
    }
  });
  if (!out.precondition.satisfied) return out;
  const auto s = detail::explanatory_set(q);
  out.beta = partial_regression(m, q.outcome, s).coefficient_on(q.treatment);
  out.expected = 0.0;
  return out;
}

// Single-door: beta equals the coefficient on the directed edge
// treatment -> outcome (zero when the edge is absent).
inline CorollaryReport corollary_single_door(const SemModel& m, const AdjustmentQuery& q,
                                             int vertex_cap = kDefaultVertexCap) {
  CorollaryReport out;
  out.precondition = single_door_precondition(m.graph, q.z, q.treatment, q.outcome, vertex_cap);
  if (!out.precondition.satisfied) return out;
  const auto s = detail::explanatory_set(q);
  out.beta = partial_regression(m, q.outcome, s).coefficient_on(q.treatment);
  out.expected = m.coefficients(q.outcome, q.treatment);
  return out;
}

// Back-door: beta equals the (uncontrolled) total effect.
inline CorollaryReport corollary_backdoor(const SemModel& m, const AdjustmentQuery& q,
                                          int vertex_cap = kDefaultVertexCap) {
  CorollaryReport out;
  out.precondition = backdoor_criterion(m.graph, q.z, q.treatment, q.outcome, vertex_cap);
  if (!out.precondition.satisfied) return out;
  const auto s = detail::explanatory_set(q);
  out.beta = partial_regression(m, q.outcome, s).coefficient_on(q.treatment);
  out.expected = total_effect(m, q.outcome, q.treatment);
  return out;
}

// Residualized system over the explanatory set s = z + treatment, relative
// to the outcome i. Each vector gives the linear combination of the original
// variables defining the residualized variable:
//   tilde_i = X_i - sum_{k in s} tau_{ik|do(s-k)} X_k
//   tilde_p = X_p - sum_{q in s2} tau_{pq|do(s2-q)} X_q        (p in s1)
//   tilde_q = X_q - sum_{p in s1} tau_{qp|do(s1-p)} X_p        (q in s2)
// The s2 residuals are uncorrelated with the outcome residual and with the
// s1 residuals; max_abs_cov_* report how close to zero the moment algebra
// lands.
struct TildeSystem {
  S1S2 partition;
  Eigen::VectorXd outcome_combo;
  std::vector<std::pair<int, Eigen::VectorXd>> s1_combos;
  std::vector<std::pair<int, Eigen::VectorXd>> s2_combos;
  double max_abs_cov_s2_outcome = 0.0;
  double max_abs_cov_s2_s1 = 0.0;
};

inline TildeSystem tilde_system(const SemModel& m, const AdjustmentQuery& q,
                                int vertex_cap = kDefaultVertexCap) {
  detail::check_query(m.graph, q.z, q.treatment, q.outcome);
  const int n = m.graph.vertex_count();
  const auto s = detail::explanatory_set(q);
  TildeSystem out;
  out.partition = partition_s1_s2(m.graph, s, q.outcome, vertex_cap);
  const auto combo = [&](int target, const std::vector<int>& subtract_over) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v(target) = 1.0;
    for (int k : subtract_over) {
      std::vector<int> rest;
      for (int w : subtract_over) {
        if (w != k) rest.push_back(w);
      }
      v(k) = -controlled_total_effect(m, target, k, rest);
    }
    return v;
  };
  out.outcome_combo = combo(q.outcome, s);
  for (int p : out.partition.s1) out.s1_combos.emplace_back(p, combo(p, out.partition.s2));
  for (int qv : out.partition.s2) out.s2_combos.emplace_back(qv, combo(qv, out.partition.s1));
  const auto mom = moments(m);
  const auto cross = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a.transpose() * mom.cov * b).value();
  };
  for (const auto& [qv, qc] : out.s2_combos) {
    out.max_abs_cov_s2_outcome = std::max(out.max_abs_cov_s2_outcome, std::abs(cross(qc, out.outcome_combo)));
    for (const auto& [pv, pc] : out.s1_combos) {
      out.max_abs_cov_s2_s1 = std::max(out.max_abs_cov_s2_s1, std::abs(cross(qc, pc)));
    }
  }
  return out;
}

// Structural companion of the residualized system: zero every coefficient
// row of an s2 member, then zero each edge into an s1 member that still has
// a directed path to the outcome free of later s1 vertices. The result stays
// strictly lower triangular, and its (I - A')^{-1} outcome row reproduces
// the controlled effects tau_{il|do(s)} on every column outside s.
struct TildePruneCheck {
  bool lower_triangular = false;
  double max_outcome_row_diff = 0.0;
  Eigen::MatrixXd pruned;
};

inline TildePruneCheck tilde_prune_check(const SemModel& m, const AdjustmentQuery& q,
                                         int vertex_cap = kDefaultVertexCap) {
  detail::check_query(m.graph, q.z, q.treatment, q.outcome);
  const int n = m.graph.vertex_count();
  const auto s = detail::explanatory_set(q);
  const auto parts = partition_s1_s2(m.graph, s, q.outcome, vertex_cap);
  VertexMask s1m = 0;
  for (int p : parts.s1) s1m |= detail::bit(p);
  Eigen::MatrixXd a = m.coefficients;
  for (int qv : parts.s2) a.row(qv).setZero();
  // Directed reachability to the outcome through non-s1 interiors, in the
  // row-zeroed graph.
  std::vector<char> reaches(static_cast<std::size_t>(n), 0);
  reaches[static_cast<std::size_t>(q.outcome)] = 1;
  for (int v = n - 1; v >= 0; --v) {
    if (v == q.outcome) continue;
    for (int w = v + 1; w < n; ++w) {
      if (a(w, v) == 0.0) continue;
      const bool interior_ok = (w == q.outcome) || !(s1m & detail::bit(w));
      if (interior_ok && reaches[static_cast<std::size_t>(w)]) {
        reaches[static_cast<std::size_t>(v)] = 1;
        break;
      }
    }
  }
  for (int p : parts.s1) {
    if (reaches[static_cast<std::size_t>(p)]) a.row(p).setZero();
  }
  TildePruneCheck out;
  out.lower_triangular = true;
  for (int i = 0; i < n && out.lower_triangular; ++i) {
    for (int j = i; j < n; ++j) {
      if (a(i, j) != 0.0) {
        out.lower_triangular = false;
        break;
      }
    }
  }
  VertexMask sm = 0;
  for (int v : s) sm |= detail::bit(v);
  ColumnVector<double> col;
  for (int l = 0; l < n; ++l) {
    if (l == q.outcome || (sm & detail::bit(l))) continue;
    detail::controlled_effect_column_into<double>(a, 0, l, col);
    const double via_prune = col(q.outcome);
    const double direct = detail::controlled_effect_entry<double>(m.coefficients, sm, l, q.outcome);
    out.max_outcome_row_diff = std::max(out.max_outcome_row_diff, std::abs(via_prune - direct));
  }
  out.pruned = std::move(a);
  return out;
}

}  // namespace seldoor
