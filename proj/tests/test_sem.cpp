#include <gtest/gtest.h>

#include <Eigen/Core>
#include <vector>

#include "oracles.hpp"
#include "seldoor/graph.hpp"
#include "seldoor/sem.hpp"

namespace {

using oracles::Rational;
using seldoor::Admg;
using seldoor::Errc;
using seldoor::SemModel;

// X1 -> X2 -> X3 with coefficients 0.5 and 2.0, unit error variances.
SemModel chain3(Eigen::VectorXd intercepts = Eigen::VectorXd::Zero(3)) {
  Admg g({"X1", "X2", "X3"}, {{0, 1}, {1, 2}}, {});
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(1, 0) = 0.5;
  a(2, 1) = 2.0;
  return seldoor::make_model(std::move(g), std::move(a), Eigen::MatrixXd::Identity(3, 3),
                             std::move(intercepts));
}

TEST(ModelValidate, AcceptsChainAndUnitModel) {
  EXPECT_TRUE(seldoor::validate_model(chain3()).ok);
  const Admg g({"X", "Y"}, {{0, 1}}, {{0, 1}});
  EXPECT_TRUE(seldoor::validate_model(seldoor::unit_model(g)).ok);
}

TEST(ModelValidate, RejectsShapeMismatches) {
  SemModel m = chain3();
  m.coefficients = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_EQ(seldoor::validate_model(m).code, Errc::not_lower_triangular);
  m = chain3();
  m.sigma = Eigen::MatrixXd::Identity(4, 4);
  EXPECT_EQ(seldoor::validate_model(m).code, Errc::sigma_not_pd);
  m = chain3();
  m.intercepts = Eigen::VectorXd::Zero(2);
  EXPECT_EQ(seldoor::validate_model(m).code, Errc::edge_coefficient_mismatch);
}

TEST(ModelValidate, RejectsCoefficientsOffTheEdgeSupport) {
  SemModel m = chain3();
  m.coefficients(0, 1) = 1.0;  // above the diagonal
  EXPECT_EQ(seldoor::validate_model(m).code, Errc::not_lower_triangular);
  m = chain3();
  m.coefficients(2, 0) = 1.0;  // no X1 -> X3 edge
  EXPECT_EQ(seldoor::validate_model(m).code, Errc::edge_coefficient_mismatch);
  m = chain3();
  m.coefficients(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(seldoor::validate_model(m).code, Errc::edge_coefficient_mismatch);
}

TEST(ModelValidate, RejectsBadSigma) {
  SemModel m = chain3();
  m.sigma(0, 1) = 0.5;  // asymmetric, and off the bidirected support
  EXPECT_EQ(seldoor::validate_model(m).code, Errc::sigma_not_pd);
  m = chain3();
  m.sigma(0, 1) = 0.5;
  m.sigma(1, 0) = 0.5;
  EXPECT_EQ(seldoor::validate_model(m).code, Errc::edge_coefficient_mismatch);
  m = chain3();
  m.sigma(0, 0) = 0.0;  // loses positive definiteness
  EXPECT_EQ(seldoor::validate_model(m).code, Errc::sigma_not_pd);
  // Correlation 1 on a declared bidirected edge is still singular.
  Admg g({"X", "Y"}, {}, {{0, 1}});
  SemModel c = seldoor::unit_model(g);
  c.sigma(0, 1) = 1.0;
  c.sigma(1, 0) = 1.0;
  EXPECT_EQ(seldoor::validate_model(c).code, Errc::sigma_not_pd);
  c.sigma(0, 1) = 0.9;
  c.sigma(1, 0) = 0.9;
  EXPECT_TRUE(seldoor::validate_model(c).ok);
}

TEST(ModelValidate, RejectsBadIntercepts) {
  SemModel m = chain3();
  m.intercepts(1) = std::numeric_limits<double>::infinity();
  EXPECT_EQ(seldoor::validate_model(m).code, Errc::edge_coefficient_mismatch);
}

TEST(Moments, ChainCovarianceByHand) {
  // Var(X1) = 1, Var(X2) = 0.25 + 1, Var(X3) = 4 * 1.25 + 1; covariances by
  // substituting each equation forward.
  const auto mom = seldoor::moments(chain3());
  EXPECT_TRUE(mom.mean.isZero(0.0));
  EXPECT_DOUBLE_EQ(mom.cov(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(mom.cov(1, 1), 1.25);
  EXPECT_DOUBLE_EQ(mom.cov(2, 2), 6.0);
  EXPECT_DOUBLE_EQ(mom.cov(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(mom.cov(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(mom.cov(1, 2), 2.5);
}

TEST(Moments, InterceptsPropagateThroughTheEquations) {
  Eigen::VectorXd c(3);
  c << 1.0, 2.0, 3.0;
  const auto mom = seldoor::moments(chain3(c));
  EXPECT_DOUBLE_EQ(mom.mean(0), 1.0);
  EXPECT_DOUBLE_EQ(mom.mean(1), 2.5);
  EXPECT_DOUBLE_EQ(mom.mean(2), 8.0);
}

TEST(Moments, CovarianceIsExactlySymmetric) {
  Admg g({"A", "B", "C", "D"}, {{0, 1}, {0, 3}, {1, 2}, {2, 3}}, {{1, 3}});
  SemModel m = seldoor::unit_model(g);
  m.coefficients(1, 0) = 0.37;
  m.coefficients(3, 0) = -1.21;
  m.coefficients(2, 1) = 0.93;
  m.coefficients(3, 2) = 0.52;
  m.sigma(1, 3) = 0.41;
  m.sigma(3, 1) = 0.41;
  const auto mom = seldoor::moments(m);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      ASSERT_EQ(mom.cov(i, j), mom.cov(j, i));
    }
  }
}

TEST(Moments, MatchesThePathBasisOracleExactly) {
  // Substitution solver against the path-sum basis expansion, both on exact
  // rationals seeded with the double parameters.
  Admg g({"A", "B", "C", "D"}, {{0, 1}, {0, 3}, {1, 2}, {2, 3}}, {{1, 3}});
  SemModel m = seldoor::unit_model(g);
  m.coefficients(1, 0) = 0.37;
  m.coefficients(3, 0) = -1.21;
  m.coefficients(2, 1) = 0.93;
  m.coefficients(3, 2) = 0.52;
  m.sigma(1, 3) = 0.41;
  m.sigma(3, 1) = 0.41;

  const auto a_rat = oracles::to_rational(m.coefficients);
  const auto s_rat = oracles::to_rational(m.sigma);
  const auto b_rat = seldoor::detail::unit_lower_inverse<Rational>(a_rat);
  oracles::Mat<Rational> cov_sub(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      Rational acc(0);
      for (int k = 0; k < 4; ++k) {
        for (int l = 0; l < 4; ++l) acc += b_rat(i, k) * s_rat(k, l) * b_rat(j, l);
      }
      cov_sub(i, j) = acc;
    }
  }
  const auto cov_paths = oracles::path_sum_cov<Rational>(g, a_rat, s_rat);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) ASSERT_EQ(cov_sub(i, j), cov_paths(i, j));
  }
  // The double pipeline lands within rounding of the exact value.
  const auto mom = seldoor::moments(m);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(mom.cov(i, j), oracles::to_double(cov_paths(i, j)), 1e-12);
    }
  }
}

TEST(Effects, ChainTotalAndControlled) {
  const SemModel m = chain3();
  EXPECT_DOUBLE_EQ(seldoor::total_effect(m, 2, 0), 1.0);
  EXPECT_DOUBLE_EQ(seldoor::total_effect(m, 1, 0), 0.5);
  EXPECT_DOUBLE_EQ(seldoor::total_effect(m, 0, 2), 0.0);
  EXPECT_DOUBLE_EQ(seldoor::controlled_total_effect(m, 2, 0, {1}), 0.0);
  EXPECT_DOUBLE_EQ(seldoor::controlled_total_effect(m, 2, 0, {}), 1.0);
}

TEST(Effects, TwoMediatorRoutesAddAndDeleteByHand) {
  // X -> M1 -> Y, X -> M2 -> Y, M1 -> M2 with distinct coefficients; the
  // three route products are 0.75, -0.25, and -1.0.
  Admg g({"X", "M1", "M2", "Y"}, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}}, {});
  SemModel m = seldoor::unit_model(g);
  m.coefficients(1, 0) = 0.5;
  m.coefficients(2, 0) = 0.25;
  m.coefficients(2, 1) = 2.0;
  m.coefficients(3, 1) = 1.5;
  m.coefficients(3, 2) = -1.0;
  EXPECT_DOUBLE_EQ(seldoor::total_effect(m, 3, 0), -0.5);
  EXPECT_DOUBLE_EQ(seldoor::controlled_total_effect(m, 3, 0, {1}), -0.25);
  EXPECT_DOUBLE_EQ(seldoor::controlled_total_effect(m, 3, 0, {2}), 0.75);
  EXPECT_DOUBLE_EQ(seldoor::controlled_total_effect(m, 3, 0, {1, 2}), 0.0);
}

TEST(Effects, QueryValidation) {
  const SemModel m = chain3();
  EXPECT_THROW(seldoor::total_effect(m, 1, 1), seldoor::Error);
  EXPECT_THROW(seldoor::total_effect(m, 3, 0), seldoor::Error);
  EXPECT_THROW(seldoor::controlled_total_effect(m, 2, 0, {0}), seldoor::Error);
  EXPECT_THROW(seldoor::controlled_total_effect(m, 2, 0, {2}), seldoor::Error);
}

TEST(AncestralExpansion, ChainReconstructsPointwise) {
  const SemModel m = chain3();
  // Over s = {X1}: X3 = 1.0 * X1 + 2.0 * u2 + u3.
  const auto ex = seldoor::ancestral_expansion(m, 2, {0});
  ASSERT_EQ(ex.coeffs_on_s.size(), 1u);
  EXPECT_DOUBLE_EQ(ex.coeffs_on_s.at(0), 1.0);
  ASSERT_EQ(ex.coeffs_on_errors.size(), 1u);
  EXPECT_DOUBLE_EQ(ex.coeffs_on_errors.at(1), 2.0);

  const Eigen::Vector3d u(0.3, -0.7, 1.1);
  Eigen::VectorXd x;
  seldoor::detail::unit_lower_solve_into<double>(m.coefficients, u, x);
  double rhs = ex.coeffs_on_s.at(0) * x(0) + ex.coeffs_on_errors.at(1) * u(1) + u(2);
  EXPECT_NEAR(x(2), rhs, 1e-15);
}

TEST(AncestralExpansion, MixedGraphReconstructsForEverySubset) {
  Admg g({"A", "B", "C", "D"}, {{0, 1}, {0, 3}, {1, 2}, {2, 3}}, {{1, 3}});
  SemModel m = seldoor::unit_model(g);
  m.coefficients(1, 0) = 0.37;
  m.coefficients(3, 0) = -1.21;
  m.coefficients(2, 1) = 0.93;
  m.coefficients(3, 2) = 0.52;
  m.sigma(1, 3) = 0.41;
  m.sigma(3, 1) = 0.41;
  const int i = 3;
  const std::vector<std::vector<int>> subsets = {{}, {0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}};
  Eigen::VectorXd u(4);
  u << 0.9, -0.4, 0.05, 1.3;
  Eigen::VectorXd x;
  seldoor::detail::unit_lower_solve_into<double>(m.coefficients, u, x);
  for (const auto& s : subsets) {
    const auto ex = seldoor::ancestral_expansion(m, i, s);
    double rhs = u(i);
    for (const auto& [j, c] : ex.coeffs_on_s) rhs += c * x(j);
    for (const auto& [k, c] : ex.coeffs_on_errors) rhs += c * u(k);
    EXPECT_NEAR(x(i), rhs, 1e-12) << "subset size " << s.size();
  }
}

TEST(AncestralExpansion, Validation) {
  const SemModel m = chain3();
  EXPECT_THROW(seldoor::ancestral_expansion(m, 2, {2}), seldoor::Error);
  EXPECT_THROW(seldoor::ancestral_expansion(m, 2, {0, 0}), seldoor::Error);
}

}  // namespace
