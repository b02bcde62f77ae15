#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "seldoor/nonlinear_demo.hpp"

namespace {

using seldoor::Errc;
using seldoor::InteractionDemoSpec;
using seldoor::NoiseKind;

// With the product interaction the closed forms are
//   E[H | do(X = x)] = a_mx x^2
//   delta(x)         = 2 a_yh a_mx x
//   tau              = a_yx + a_ym a_mx
// so the defaults give g(2) = 2, delta(2) = 1.4, tau = 0.7.

TEST(InteractionDemo, DefaultsRecoverTheGeneratingValues) {
  const InteractionDemoSpec spec;
  const auto rep = seldoor::interaction_demo(spec, {0.0, 1.0, 2.0}, 200000, 42);
  EXPECT_EQ(rep.n, 200000u);
  EXPECT_NEAR(rep.tau_reference, 0.7, 1e-12);
  EXPECT_EQ(rep.fd_step, 1.0);

  EXPECT_GT(rep.a_mx_se, 0.0);
  EXPECT_LT(rep.a_mx_se, 0.01);
  EXPECT_NEAR(rep.a_mx_hat, 0.5, 5.0 * rep.a_mx_se);
  EXPECT_NEAR(rep.a_mz_hat, 0.3, 0.02);
  EXPECT_NEAR(rep.tau_yx_hat, 0.7, 5.0 * rep.tau_yx_se);
  EXPECT_NEAR(rep.a_yh_hat, 0.7, 5.0 * rep.a_yh_se);

  ASSERT_EQ(rep.points.size(), 3u);
  EXPECT_EQ(rep.points[0].x, 0.0);
  EXPECT_EQ(rep.points[2].x, 2.0);
  for (const auto& pt : rep.points) {
    EXPECT_GT(pt.delta_se, 0.0);
    EXPECT_LT(pt.delta_se, 0.05);
    EXPECT_NEAR(pt.delta_hat, 0.7 * pt.x, 5.0 * pt.delta_se);
    EXPECT_NEAR(pt.g_hat, 0.5 * pt.x * pt.x, 0.05);
    EXPECT_EQ(pt.total_hat, rep.tau_yx_hat + pt.delta_hat);
  }
  EXPECT_LT(rep.points[0].delta_hat, rep.points[1].delta_hat);
  EXPECT_LT(rep.points[1].delta_hat, rep.points[2].delta_hat);
}

TEST(InteractionDemo, InteractionChannelVanishesWithoutTheNonlinearEdge) {
  InteractionDemoSpec spec;
  spec.a_yh = 0.0;
  const auto rep = seldoor::interaction_demo(spec, {2.0}, 100000, 7);
  EXPECT_NEAR(rep.a_yh_hat, 0.0, 5.0 * rep.a_yh_se);
  EXPECT_NEAR(rep.tau_yx_hat, 0.7, 5.0 * rep.tau_yx_se);
  ASSERT_EQ(rep.points.size(), 1u);
  EXPECT_LT(std::abs(rep.points[0].delta_hat), 0.02);
  // A single grid point falls back to the default difference step.
  EXPECT_EQ(rep.fd_step, 0.5);
}

TEST(InteractionDemo, SkewedNoiseKeepsTheEstimatesConsistent) {
  // Consistency rests on zero-mean independent errors, not on gaussianity.
  InteractionDemoSpec spec;
  spec.noise = NoiseKind::shifted_exponential;
  const auto rep = seldoor::interaction_demo(spec, {1.0}, 200000, 99);
  EXPECT_NEAR(rep.a_mx_hat, 0.5, 5.0 * rep.a_mx_se);
  EXPECT_NEAR(rep.a_yh_hat, 0.7, 5.0 * rep.a_yh_se);
  ASSERT_EQ(rep.points.size(), 1u);
  EXPECT_NEAR(rep.points[0].delta_hat, 0.7, 5.0 * rep.points[0].delta_se);
}

TEST(InteractionDemo, CustomCoefficientsPropagateToTheReference) {
  InteractionDemoSpec spec;
  spec.a_yx = 0.1;
  spec.a_ym = 0.2;
  spec.a_mx = 0.5;
  const auto rep = seldoor::interaction_demo(spec, {0.0}, 1000, 3);
  EXPECT_NEAR(rep.tau_reference, 0.2, 1e-15);
}

TEST(InteractionDemo, DeterministicInTheSeed) {
  const InteractionDemoSpec spec;
  const auto a = seldoor::interaction_demo(spec, {0.5, 1.5}, 5000, 11);
  const auto b = seldoor::interaction_demo(spec, {0.5, 1.5}, 5000, 11);
  EXPECT_EQ(a.a_mx_hat, b.a_mx_hat);
  EXPECT_EQ(a.tau_yx_hat, b.tau_yx_hat);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].g_hat, b.points[i].g_hat);
    EXPECT_EQ(a.points[i].delta_hat, b.points[i].delta_hat);
  }
  const auto c = seldoor::interaction_demo(spec, {0.5, 1.5}, 5000, 12);
  EXPECT_NE(a.a_mx_hat, c.a_mx_hat);
}

TEST(InteractionDemo, RejectsDegenerateRequests) {
  const InteractionDemoSpec spec;
  const auto expect_code = [&](const std::vector<double>& grid, Eigen::Index n, Errc want) {
    try {
      seldoor::interaction_demo(spec, grid, n, 1);
      FAIL() << "expected rejection";
    } catch (const seldoor::Error& e) {
      EXPECT_EQ(e.code(), want) << e.what();
    }
  };
  expect_code({}, 1000, Errc::parse_error);
  expect_code({1.0}, 15, Errc::singular_design);
  expect_code({1.0}, -5, Errc::singular_design);
  expect_code({1.0, 1.0}, 1000, Errc::parse_error);
  InteractionDemoSpec bad;
  bad.function = "sum";
  EXPECT_THROW(seldoor::interaction_demo(bad, {1.0}, 1000, 1), seldoor::Error);
  InteractionDemoSpec negvar;
  negvar.var_m = 0.0;
  EXPECT_THROW(seldoor::interaction_demo(negvar, {1.0}, 1000, 1), seldoor::Error);
}

TEST(InteractionDemo, FunctionTableIsByName) {
  EXPECT_EQ(seldoor::interaction_function("product")(3.0, 4.0), 12.0);
  try {
    seldoor::interaction_function("quotient");
    FAIL() << "expected rejection";
  } catch (const seldoor::Error& e) {
    EXPECT_EQ(e.code(), Errc::unsupported_function);
  }
}

}  // namespace
