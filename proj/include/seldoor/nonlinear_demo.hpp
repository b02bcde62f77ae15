#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "seldoor/montecarlo.hpp"

namespace seldoor {

// Binary interaction functions available to model files by name.
using InteractionFn = double (*)(double, double);

inline InteractionFn interaction_function(const std::string& name) {
  if (name == "product") return +[](double x, double m) { return x * m; };
  throw Error(Errc::unsupported_function, "unknown interaction function: " + name);
}

// Five-variable demonstration system with one interaction term:
//   Z = u_Z
//   X = a_xz Z + u_X
//   M = a_mx X + a_mz Z + u_M
//   H = h(X, M)
//   Y = a_yx X + a_ym M + a_yh H + a_yz Z + u_Y
// Errors are independent with zero means; the zero means carry the
// orthogonality that makes the regression of Y on {X, H, Z} consistent for
// the product interaction.
struct InteractionDemoSpec {
  double a_xz = 0.8;
  double a_mx = 0.5;
  double a_mz = 0.3;
  double a_yx = 0.4;
  double a_ym = 0.6;
  double a_yh = 0.7;
  double a_yz = 0.2;
  double var_z = 1.0;
  double var_x = 1.0;
  double var_m = 1.0;
  double var_y = 1.0;
  std::string function = "product";
  NoiseKind noise = NoiseKind::gaussian;
};

struct InteractionDemoPoint {
  double x = 0.0;
  // Plug-in estimate of E[h | do(X = x)].
  double g_hat = 0.0;
  // Interaction channel a_yh * d/dx g(x), by central difference.
  double delta_hat = 0.0;
  double delta_se = 0.0;
  // Full derivative of E[Y | do(X = x)]: linear channel plus interaction.
  double total_hat = 0.0;
};

struct InteractionDemoReport {
  std::uint64_t n = 0;
  double a_mx_hat = 0.0;
  double a_mx_se = 0.0;
  double a_mz_hat = 0.0;
  double tau_yx_hat = 0.0;
  double tau_yx_se = 0.0;
  double a_yh_hat = 0.0;
  double a_yh_se = 0.0;
  // Linear-channel reference a_yx + a_ym * a_mx from the generating values.
  double tau_reference = 0.0;
  double fd_step = 0.0;
  std::vector<InteractionDemoPoint> points;
};

namespace detail {

// Column order of the simulated demo data.
enum DemoColumn : int { kDemoZ = 0, kDemoX = 1, kDemoM = 2, kDemoH = 3, kDemoY = 4 };

inline Dataset simulate_interaction_demo(const InteractionDemoSpec& spec, Eigen::Index n,
                                         std::uint64_t seed) {
  const InteractionFn h = interaction_function(spec.function);
  for (double v : {spec.var_z, spec.var_x, spec.var_m, spec.var_y}) {
    if (!(v > 0.0)) throw Error(Errc::sigma_not_pd, "demo error variances must be positive");
  }
  Dataset out;
  out.names = {"Z", "X", "M", "H", "Y"};
  out.columns.resize(n, 5);
  std::mt19937_64 eng(seed);
  StdNoiseSource source{&eng, spec.noise};
  const double sd_z = std::sqrt(spec.var_z);
  const double sd_x = std::sqrt(spec.var_x);
  const double sd_m = std::sqrt(spec.var_m);
  const double sd_y = std::sqrt(spec.var_y);
  for (Eigen::Index row = 0; row < n; ++row) {
    const double z = sd_z * source.next();
    const double x = spec.a_xz * z + sd_x * source.next();
    const double m = spec.a_mx * x + spec.a_mz * z + sd_m * source.next();
    const double hv = h(x, m);
    const double y = spec.a_yx * x + spec.a_ym * m + spec.a_yh * hv + spec.a_yz * z + sd_y * source.next();
    out.columns(row, kDemoZ) = z;
    out.columns(row, kDemoX) = x;
    out.columns(row, kDemoM) = m;
    out.columns(row, kDemoH) = hv;
    out.columns(row, kDemoY) = y;
  }
  return out;
}

// Plug-in estimate of E[h | do(X = x)]: the mechanism residual M - a_mx X
// keeps the empirical joint law of everything feeding M besides X.
inline double plugin_g(const Eigen::ArrayXd& residual, InteractionFn h, double a_mx, double x) {
  double acc = 0.0;
  for (Eigen::Index s = 0; s < residual.size(); ++s) acc += h(x, a_mx * x + residual(s));
  return acc / static_cast<double>(residual.size());
}

}  // namespace detail

inline InteractionDemoReport interaction_demo(const InteractionDemoSpec& spec,
                                              const std::vector<double>& grid, Eigen::Index n,
                                              std::uint64_t seed) {
  if (grid.empty()) throw Error(Errc::parse_error, "evaluation grid is empty");
  if (n < 16) throw Error(Errc::singular_design, "demo needs a nontrivial sample");
  const InteractionFn h = interaction_function(spec.function);
  const Dataset data = detail::simulate_interaction_demo(spec, n, seed);

  InteractionDemoReport out;
  out.n = static_cast<std::uint64_t>(n);
  const auto fit_m = ols(data, detail::kDemoM, {detail::kDemoZ, detail::kDemoX});
  out.a_mx_hat = fit_m.coefficient_on(detail::kDemoX);
  out.a_mx_se = fit_m.standard_error_on(detail::kDemoX);
  out.a_mz_hat = fit_m.coefficient_on(detail::kDemoZ);
  const auto fit_y = ols(data, detail::kDemoY, {detail::kDemoZ, detail::kDemoX, detail::kDemoH});
  out.tau_yx_hat = fit_y.coefficient_on(detail::kDemoX);
  out.tau_yx_se = fit_y.standard_error_on(detail::kDemoX);
  out.a_yh_hat = fit_y.coefficient_on(detail::kDemoH);
  out.a_yh_se = fit_y.standard_error_on(detail::kDemoH);
  out.tau_reference = spec.a_yx + spec.a_ym * spec.a_mx;

  const Eigen::ArrayXd residual =
      data.columns.col(detail::kDemoM).array() - out.a_mx_hat * data.columns.col(detail::kDemoX).array();
  out.fd_step = grid.size() >= 2 ? std::abs(grid[1] - grid[0]) : 0.5;
  if (!(out.fd_step > 0.0)) throw Error(Errc::parse_error, "grid points must be distinct");
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double x : grid) {
    InteractionDemoPoint pt;
    pt.x = x;
    pt.g_hat = detail::plugin_g(residual, h, out.a_mx_hat, x);
    const double lo = x - out.fd_step;
    const double hi = x + out.fd_step;
    // Slope samples: per-observation central difference of h along the
    // do(X = x) curve; their mean is the derivative estimate and their
    // spread gives its Monte Carlo error.
    double mean_w = 0.0;
    double m2_w = 0.0;
    for (Eigen::Index s = 0; s < residual.size(); ++s) {
      const double w = (h(hi, out.a_mx_hat * hi + residual(s)) - h(lo, out.a_mx_hat * lo + residual(s))) /
                       (2.0 * out.fd_step);
      const double d = w - mean_w;
      mean_w += d / static_cast<double>(s + 1);
      m2_w += d * (w - mean_w);
    }
    const double var_w = m2_w / static_cast<double>(n - 1);
    // Sensitivity of the slope to the estimated mechanism coefficient, by a
    // small perturbation; the residual sequence moves along with it.
    const double bump = 1e-4 * std::max(1.0, std::abs(out.a_mx_hat));
    const double a_bumped = out.a_mx_hat + bump;
    double mean_w_bumped = 0.0;
    for (Eigen::Index s = 0; s < residual.size(); ++s) {
      const double r2 = residual(s) - bump * data.columns(s, detail::kDemoX);
      const double w = (h(hi, a_bumped * hi + r2) - h(lo, a_bumped * lo + r2)) / (2.0 * out.fd_step);
      mean_w_bumped += w;
    }
    mean_w_bumped *= inv_n;
    const double slope_wrt_a = (mean_w_bumped - mean_w) / bump;
    pt.delta_hat = out.a_yh_hat * mean_w;
    pt.delta_se = std::sqrt(out.a_yh_hat * out.a_yh_hat * var_w * inv_n +
                            mean_w * mean_w * out.a_yh_se * out.a_yh_se +
                            out.a_yh_hat * out.a_yh_hat * slope_wrt_a * slope_wrt_a * out.a_mx_se * out.a_mx_se);
    pt.total_hat = out.tau_yx_hat + pt.delta_hat;
    out.points.push_back(pt);
  }
  return out;
}

}  // namespace seldoor
