#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "seldoor/analysis.hpp"
#include "seldoor/regression.hpp"
#include "seldoor/sem.hpp"

namespace seldoor {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-trial seed: decorrelates consecutive indices under one master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 1));
}

// Magnitude ranges for random parameterizations. Signs are drawn separately,
// so coefficients land in [-max,-min] U [min,max]: bounded away from zero
// (degenerate mechanisms) and from blowup.
struct ParamRanges {
  double coef_min = 0.2;
  double coef_max = 1.5;
  double var_min = 0.5;
  double var_max = 2.0;
  double corr_min = 0.1;
  double corr_max = 0.6;
};

namespace detail {

inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

inline double random_sign(std::mt19937_64& eng) { return uniform01(eng) < 0.5 ? -1.0 : 1.0; }

// Edge lists in the canonical draw order, frozen once per graph so the
// per-trial loop touches no Admg internals.
struct DrawPlan {
  int n = 0;
  std::vector<DirectedEdge> directed;
  std::vector<BidirectedEdge> bidirected;
};

inline DrawPlan make_draw_plan(const Admg& g) {
  DrawPlan plan;
  plan.n = g.vertex_count();
  plan.directed = g.directed();
  std::sort(plan.directed.begin(), plan.directed.end(), [](const DirectedEdge& a, const DirectedEdge& b) {
    return a.from != b.from ? a.from < b.from : a.to < b.to;
  });
  for (const auto& e : g.bidirected()) {
    plan.bidirected.push_back({std::min(e.a, e.b), std::max(e.a, e.b)});
  }
  std::sort(plan.bidirected.begin(), plan.bidirected.end(), [](const BidirectedEdge& a, const BidirectedEdge& b) {
    return a.a != b.a ? a.a < b.a : a.b < b.b;
  });
  return plan;
}

inline constexpr int kMaxSigmaAttempts = 100;

// Draw order (frozen; regression tests pin it): each directed edge ascending
// by (from, to) takes magnitude then sign; then up to kMaxSigmaAttempts
// error-covariance attempts, each drawing variances ascending by vertex and
// correlations ascending by normalized pair (magnitude then sign), kept only
// if positive definite. chol_l and chol_d receive the accepted factor.
inline void random_model_into(const DrawPlan& plan, std::mt19937_64& eng, const ParamRanges& r,
                              Eigen::MatrixXd& a, Eigen::MatrixXd& sigma, Eigen::MatrixXd& chol_l,
                              Eigen::VectorXd& chol_d) {
  const int n = plan.n;
  a.setZero(n, n);
  for (const auto& e : plan.directed) {
    const double mag = uniform_in(eng, r.coef_min, r.coef_max);
    a(e.to, e.from) = random_sign(eng) * mag;
  }
  for (int attempt = 0; attempt < kMaxSigmaAttempts; ++attempt) {
    sigma.setZero(n, n);
    for (int v = 0; v < n; ++v) sigma(v, v) = uniform_in(eng, r.var_min, r.var_max);
    for (const auto& e : plan.bidirected) {
      const double mag = uniform_in(eng, r.corr_min, r.corr_max);
      const double corr = random_sign(eng) * mag;
      const double cov = corr * std::sqrt(sigma(e.a, e.a) * sigma(e.b, e.b));
      sigma(e.a, e.b) = cov;
      sigma(e.b, e.a) = cov;
    }
    if (ldlt_factor<double>(sigma, kPivotTol, chol_l, chol_d)) return;
  }
  throw Error(Errc::pd_generation_failed,
              "no positive definite error covariance in " + std::to_string(kMaxSigmaAttempts) + " attempts");
}

// Query data frozen once so the trial loop does no lookups or sorting.
struct QueryContext {
  int outcome = 0;
  int treatment = 0;
  std::vector<int> s_sorted;
  int treatment_pos = 0;
  VertexMask zm = 0;
};

inline QueryContext make_query_context(const Admg& g, const AdjustmentQuery& q) {
  check_query(g, q.z, q.treatment, q.outcome);
  QueryContext ctx;
  ctx.outcome = q.outcome;
  ctx.treatment = q.treatment;
  ctx.s_sorted = explanatory_set(q);
  ctx.treatment_pos = static_cast<int>(
      std::lower_bound(ctx.s_sorted.begin(), ctx.s_sorted.end(), q.treatment) - ctx.s_sorted.begin());
  ctx.zm = mask_of(q.z, g, "adjustment vertex");
  return ctx;
}

struct TrialWorkspace {
  Eigen::MatrixXd a, sigma, chol_l, b, bsig, cov, v;
  Eigen::VectorXd chol_d, c, reg_y, beta;
  Eigen::MatrixXd reg_l;
  Eigen::VectorXd reg_d;
  ColumnVector<double> effect;
};

struct TrialValue {
  double beta = 0.0;
  double tau = 0.0;
  double gamma = 0.0;
};

// One randomized trial: draw a model, regress the outcome on the explanatory
// set, subtract the controlled total effect. The arithmetic mirrors the
// moments / regress_from_moments / controlled_total_effect route step for
// step so results agree bit for bit with the allocating entry points; after
// the first call every Eigen resize is a no-op and the loop is heap-free.
inline TrialValue trial_value_into(const DrawPlan& plan, const QueryContext& ctx, std::uint64_t seed,
                                   const ParamRanges& r, TrialWorkspace& ws) {
  std::mt19937_64 eng(seed);
  random_model_into(plan, eng, r, ws.a, ws.sigma, ws.chol_l, ws.chol_d);
  const int n = plan.n;
  ws.b.resize(n, n);
  for (int col = 0; col < n; ++col) {
    for (int i = 0; i < n; ++i) {
      double acc = i == col ? 1.0 : 0.0;
      for (int j = 0; j < i; ++j) acc += ws.a(i, j) * ws.b(j, col);
      ws.b(i, col) = acc;
    }
  }
  ws.bsig.resize(n, n);
  ws.bsig.noalias() = ws.b * ws.sigma;
  ws.cov.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += ws.bsig(i, k) * ws.b(j, k);
      ws.cov(i, j) = acc;
      ws.cov(j, i) = acc;
    }
  }
  const int k = static_cast<int>(ctx.s_sorted.size());
  ws.v.resize(k, k);
  ws.c.resize(k);
  for (int a2 = 0; a2 < k; ++a2) {
    for (int b2 = 0; b2 < k; ++b2) ws.v(a2, b2) = ws.cov(ctx.s_sorted[a2], ctx.s_sorted[b2]);
    ws.c(a2) = ws.cov(ctx.s_sorted[a2], ctx.outcome);
  }
  if (!ldlt_factor<double>(ws.v, kPivotTol, ws.reg_l, ws.reg_d)) {
    throw Error(Errc::singular_design, "regressor covariance is numerically singular");
  }
  ws.reg_y.resize(k);
  for (int i = 0; i < k; ++i) {
    double acc = ws.c(i);
    for (int j = 0; j < i; ++j) acc -= ws.reg_l(i, j) * ws.reg_y(j);
    ws.reg_y(i) = acc;
  }
  ws.beta.resize(k);
  for (int i = k - 1; i >= 0; --i) {
    double acc = ws.reg_y(i) / ws.reg_d(i);
    for (int j = i + 1; j < k; ++j) acc -= ws.reg_l(j, i) * ws.beta(j);
    ws.beta(i) = acc;
  }
  TrialValue out;
  out.beta = ws.beta(ctx.treatment_pos);
  controlled_effect_column_into<double>(ws.a, ctx.zm, ctx.treatment, ws.effect);
  out.tau = ws.effect(ctx.outcome);
  out.gamma = out.beta - out.tau;
  return out;
}

}  // namespace detail

using detail::TrialValue;

// Random parameterization of g: coefficients on the directed edges, error
// variances, and error covariances on the bidirected pairs, redrawn until
// positive definite. Intercepts are zero. Deterministic in the seed.
inline SemModel random_model(const Admg& g, std::uint64_t seed, const ParamRanges& r = {}) {
  const auto plan = detail::make_draw_plan(g);
  std::mt19937_64 eng(seed);
  Eigen::MatrixXd a, sigma, l;
  Eigen::VectorXd d;
  detail::random_model_into(plan, eng, r, a, sigma, l, d);
  return make_model(g, std::move(a), std::move(sigma), Eigen::VectorXd::Zero(plan.n));
}

// Single randomized trial for one query; equals the gamma that identify()
// reports on random_model(g, seed, r).
inline TrialValue necessity_trial(const Admg& g, const AdjustmentQuery& q, std::uint64_t seed,
                                  const ParamRanges& r = {}) {
  const auto plan = detail::make_draw_plan(g);
  const auto ctx = detail::make_query_context(g, q);
  detail::TrialWorkspace ws;
  return detail::trial_value_into(plan, ctx, seed, r, ws);
}

struct Disagreement {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  double gamma = 0.0;
};

struct NecessityOptions {
  std::uint64_t trials = 200;
  // Bias within tol_eq counts as zero.
  double tol_eq = 1e-7;
  // Criterion-false queries may land in the measure-zero cancellation set by
  // numeric accident; up to this fraction of trials may do so.
  double allowed_disagree_fraction = 0.01;
  ParamRanges ranges;
  std::size_t max_logged = 16;
};

struct TrialSummary {
  std::uint64_t trials = 0;
  bool criterion_satisfied = false;
  std::uint64_t agree_count = 0;
  std::vector<Disagreement> disagreements;
  double tol_eq = 0.0;
  double max_abs_gamma = 0.0;
  double min_abs_gamma = std::numeric_limits<double>::infinity();
  bool within_policy = false;
  std::uint64_t disagree_count() const { return trials - agree_count; }
};

// Monte Carlo check that the criterion verdict matches the bias numerically:
// a satisfied criterion must give zero bias on every draw, a violated one
// must give nonzero bias on all but an allowed sliver of draws.
inline TrialSummary verify_necessity(const Admg& g, const AdjustmentQuery& q, std::uint64_t master_seed,
                                     const NecessityOptions& opt = {}) {
  TrialSummary out;
  out.criterion_satisfied = selective_door_criterion(g, q.z, q.treatment, q.outcome, q.strict).satisfied;
  out.trials = opt.trials;
  out.tol_eq = opt.tol_eq;
  const auto plan = detail::make_draw_plan(g);
  const auto ctx = detail::make_query_context(g, q);
  detail::TrialWorkspace ws;
  for (std::uint64_t t = 0; t < opt.trials; ++t) {
    const std::uint64_t seed = derive_seed(master_seed, t);
    const double gamma = detail::trial_value_into(plan, ctx, seed, opt.ranges, ws).gamma;
    const double mag = std::abs(gamma);
    out.max_abs_gamma = std::max(out.max_abs_gamma, mag);
    out.min_abs_gamma = std::min(out.min_abs_gamma, mag);
    const bool zero = mag <= opt.tol_eq;
    if (zero == out.criterion_satisfied) {
      ++out.agree_count;
    } else if (out.disagreements.size() < opt.max_logged) {
      out.disagreements.push_back({t, seed, gamma});
    }
  }
  const auto disagree = out.disagree_count();
  out.within_policy = out.criterion_satisfied
                          ? disagree == 0
                          : static_cast<double>(disagree) <=
                                opt.allowed_disagree_fraction * static_cast<double>(opt.trials);
  return out;
}

// Finite-sample side: draws from the model, one row per observation.
enum class NoiseKind { gaussian, uniform, shifted_exponential };

inline const char* noise_kind_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::uniform: return "uniform";
    case NoiseKind::shifted_exponential: return "shifted-exponential";
  }
  return "?";
}

struct Dataset {
  std::vector<std::string> names;
  // n_obs x n_vars, column v holds variable v.
  Eigen::MatrixXd columns;
  Eigen::Index observations() const { return columns.rows(); }
};

namespace detail {

// Standardized draws (mean 0, variance 1) in each flavor. The normal source
// is the polar-free two-at-a-time transform; the spare is kept so one stream
// of engine output maps to one stream of values.
struct StdNoiseSource {
  std::mt19937_64* eng = nullptr;
  NoiseKind kind = NoiseKind::gaussian;
  bool has_spare = false;
  double spare = 0.0;

  double next() {
    switch (kind) {
      case NoiseKind::gaussian: {
        if (has_spare) {
          has_spare = false;
          return spare;
        }
        const double u1 = static_cast<double>(((*eng)() >> 11) + 1ULL) * 0x1.0p-53;
        const double u2 = uniform01(*eng);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare = r * std::sin(t);
        has_spare = true;
        return r * std::cos(t);
      }
      case NoiseKind::uniform: {
        // U(-sqrt(3), sqrt(3)) has unit variance.
        return (2.0 * uniform01(*eng) - 1.0) * 1.7320508075688772935274463415059;
      }
      case NoiseKind::shifted_exponential: {
        // Exp(1) - 1: skewed, unit variance.
        return -std::log(1.0 - uniform01(*eng)) - 1.0;
      }
    }
    return 0.0;
  }
};

}  // namespace detail

inline Dataset sample_data(const SemModel& m, Eigen::Index n_obs, std::uint64_t seed,
                           NoiseKind kind = NoiseKind::gaussian) {
  const auto vr = validate_model(m);
  if (!vr.ok) throw Error(vr.code, vr.message);
  if (n_obs < 0) throw Error(Errc::parse_error, "observation count must be nonnegative");
  const int n = m.graph.vertex_count();
  Eigen::MatrixXd l;
  Eigen::VectorXd d;
  if (!detail::ldlt_factor<double>(m.sigma, kPivotTol, l, d)) {
    throw Error(Errc::sigma_not_pd, "error covariance is not positive definite");
  }
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const double scale = std::sqrt(d(j));
    for (int i = j; i < n; ++i) chol(i, j) = l(i, j) * scale;
  }
  Dataset out;
  out.names = m.graph.names();
  out.columns.resize(n_obs, n);
  std::mt19937_64 eng(seed);
  detail::StdNoiseSource source{&eng, kind};
  Eigen::VectorXd z(n), x(n);
  for (Eigen::Index row = 0; row < n_obs; ++row) {
    for (int v = 0; v < n; ++v) z(v) = source.next();
    for (int i = 0; i < n; ++i) {
      double u = m.intercepts(i);
      for (int j = 0; j <= i; ++j) u += chol(i, j) * z(j);
      for (int j = 0; j < i; ++j) u += m.coefficients(i, j) * x(j);
      x(i) = u;
    }
    out.columns.row(row) = x.transpose();
  }
  return out;
}

// Least squares fit with intercept from sample moments. residual_variance is
// SSR / (n - k - 1); standard errors come from the usual sandwich-free
// formula s^2 (Xc'Xc)^{-1}.
struct OlsFit {
  std::vector<int> regressors;
  std::vector<double> coefficients;
  double intercept = 0.0;
  double residual_variance = 0.0;
  std::vector<double> standard_errors;
  double coefficient_on(int vertex) const {
    for (std::size_t a = 0; a < regressors.size(); ++a) {
      if (regressors[a] == vertex) return coefficients[a];
    }
    throw Error(Errc::unknown_vertex, "vertex is not a regressor in this fit");
  }
  double standard_error_on(int vertex) const {
    for (std::size_t a = 0; a < regressors.size(); ++a) {
      if (regressors[a] == vertex) return standard_errors[a];
    }
    throw Error(Errc::unknown_vertex, "vertex is not a regressor in this fit");
  }
};

inline OlsFit ols(const Dataset& data, int i, const std::vector<int>& s) {
  const int n_vars = static_cast<int>(data.columns.cols());
  const auto check = [&](int v, const char* what) {
    if (v < 0 || v >= n_vars) throw Error(Errc::unknown_vertex, std::string(what) + " out of range");
  };
  check(i, "response");
  auto s_sorted = detail::sorted_unique_set(s);
  if (s_sorted.size() != s.size()) throw Error(Errc::singular_design, "duplicate regressor");
  for (int v : s_sorted) {
    check(v, "regressor");
    if (v == i) throw Error(Errc::outcome_in_set, "response used as regressor");
  }
  const Eigen::Index n_obs = data.observations();
  const int k = static_cast<int>(s_sorted.size());
  if (n_obs < k + 2) throw Error(Errc::singular_design, "not enough observations");
  Eigen::VectorXd mean = data.columns.colwise().mean();
  SquareMatrix<double> v(k, k);
  ColumnVector<double> c(k);
  const double denom = static_cast<double>(n_obs - 1);
  for (int a = 0; a < k; ++a) {
    const auto ca = data.columns.col(s_sorted[a]);
    for (int b = 0; b <= a; ++b) {
      const auto cb = data.columns.col(s_sorted[b]);
      const double cov = ((ca.array() - mean(s_sorted[a])) * (cb.array() - mean(s_sorted[b]))).sum() / denom;
      v(a, b) = cov;
      v(b, a) = cov;
    }
    c(a) = ((ca.array() - mean(s_sorted[a])) * (data.columns.col(i).array() - mean(i))).sum() / denom;
  }
  ColumnVector<double> beta;
  if (!detail::ldlt_solve<double>(v, c, kPivotTol, beta)) {
    throw Error(Errc::singular_design, "regressor sample covariance is numerically singular");
  }
  OlsFit out;
  out.regressors = s_sorted;
  out.coefficients.assign(beta.data(), beta.data() + k);
  double mean_part = 0.0;
  for (int a = 0; a < k; ++a) mean_part += beta(a) * mean(s_sorted[a]);
  out.intercept = mean(i) - mean_part;
  Eigen::ArrayXd resid = data.columns.col(i).array() - out.intercept;
  for (int a = 0; a < k; ++a) resid -= beta(a) * data.columns.col(s_sorted[a]).array();
  const double ssr = (resid * resid).sum();
  out.residual_variance = ssr / static_cast<double>(n_obs - k - 1);
  out.standard_errors.resize(static_cast<std::size_t>(k));
  ColumnVector<double> e = ColumnVector<double>::Zero(k), col;
  for (int a = 0; a < k; ++a) {
    e(a) = 1.0;
    if (!detail::ldlt_solve<double>(v, e, kPivotTol, col)) {
      throw Error(Errc::singular_design, "regressor sample covariance is numerically singular");
    }
    out.standard_errors[static_cast<std::size_t>(a)] = std::sqrt(out.residual_variance * col(a) / denom);
    e(a) = 0.0;
  }
  return out;
}

namespace detail {

// Shortest representation that round-trips.
inline void append_double(std::string& line, double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  line.append(buf, end);
}

}  // namespace detail

inline void write_csv(const Dataset& data, std::ostream& os) {
  std::string line;
  for (std::size_t v = 0; v < data.names.size(); ++v) {
    if (v) line.push_back(',');
    line += data.names[v];
  }
  line.push_back('\n');
  os << line;
  for (Eigen::Index row = 0; row < data.columns.rows(); ++row) {
    line.clear();
    for (Eigen::Index v = 0; v < data.columns.cols(); ++v) {
      if (v) line.push_back(',');
      detail::append_double(line, data.columns(row, v));
    }
    line.push_back('\n');
    os << line;
  }
}

}  // namespace seldoor
