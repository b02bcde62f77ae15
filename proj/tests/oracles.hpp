#pragma once

// Independent reimplementations used only to cross-check the library.
// Everything here deliberately takes a different route: effects are summed
// path by path instead of solved by substitution, covariances go through an
// explicit basis expansion, and regressions run Gaussian elimination on the
// intercept-augmented normal equations. Exact arithmetic uses
// boost::multiprecision::cpp_rational; a double copied into a rational is
// exact, so rational comparisons of double-seeded inputs are equality checks.

#include <Eigen/Core>
#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <cstdint>
#include <optional>
#include <vector>

#include "seldoor/graph.hpp"
#include "seldoor/sem.hpp"

namespace oracles {

using Rational = boost::multiprecision::cpp_rational;

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

inline Mat<Rational> to_rational(const Eigen::MatrixXd& m) {
  Mat<Rational> out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = Rational(m(i, j));
  }
  return out;
}

inline Vec<Rational> to_rational(const Eigen::VectorXd& v) {
  Vec<Rational> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = Rational(v(i));
  return out;
}

inline double to_double(const Rational& r) { return static_cast<double>(r); }

// Sum of coefficient products over every directed path source ->-> target
// that never enters a vertex in `banned`. Plain backtracking enumeration, one
// product per path, no memoisation: exponential on purpose so it shares no
// structure with the substitution solver it checks.
template <class T>
T path_sum_effect(const seldoor::Admg& g, const Mat<T>& a, seldoor::VertexMask banned, int source,
                  int target) {
  if (source == target) return T(1);
  T total(0);
  for (int w = 0; w < g.vertex_count(); ++w) {
    if (!g.has_directed(source, w)) continue;
    if (seldoor::detail::bit(w) & banned) continue;
    total += a(w, source) * path_sum_effect(g, a, banned, w, target);
  }
  return total;
}

// Covariance by basis expansion: write each X_i over the error vector as
// row i of (I - A)^{-1}, with every entry a path sum, then form T Sigma T^t
// entry by entry.
template <class T>
Mat<T> path_sum_cov(const seldoor::Admg& g, const Mat<T>& a, const Mat<T>& sigma) {
  const int n = g.vertex_count();
  Mat<T> basis(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      basis(i, k) = k == i ? T(1) : (k < i ? path_sum_effect(g, a, 0, k, i) : T(0));
    }
  }
  Mat<T> cov(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      T acc(0);
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) acc += basis(i, k) * sigma(k, l) * basis(j, l);
      }
      cov(i, j) = acc;
    }
  }
  return cov;
}

// Gaussian elimination with partial pivoting (largest |pivot| for double,
// first nonzero for exact scalars). Returns nullopt on a zero pivot column.
template <class T>
std::optional<Vec<T>> gaussian_solve(Mat<T> m, Vec<T> rhs) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = -1;
    T best(0);
    for (Eigen::Index r = col; r < n; ++r) {
      T mag = m(r, col) < T(0) ? T(-m(r, col)) : m(r, col);
      if (pivot < 0 ? mag != T(0) : mag > best) {
        pivot = r;
        best = mag;
      }
    }
    if (pivot < 0) return std::nullopt;
    if (pivot != col) {
      m.row(pivot).swap(m.row(col));
      std::swap(rhs(pivot), rhs(col));
    }
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (m(r, col) == T(0)) continue;
      const T f = m(r, col) / m(col, col);
      for (Eigen::Index c = col; c < n; ++c) m(r, c) -= f * m(col, c);
      rhs(r) -= f * rhs(col);
    }
  }
  Vec<T> x(n);
  for (Eigen::Index r = n - 1; r >= 0; --r) {
    T acc = rhs(r);
    for (Eigen::Index c = r + 1; c < n; ++c) acc -= m(r, c) * x(c);
    x(r) = acc / m(r, r);
  }
  return x;
}

// Population regression through the intercept-augmented normal equations on
// raw moments: solve E[(1, X_s)(1, X_s)^t] b = E[(1, X_s) X_i]. Entry 0 of
// the result is the intercept.
template <class T>
std::optional<Vec<T>> regression_by_raw_moments(const Vec<T>& mean, const Mat<T>& cov, int i,
                                                const std::vector<int>& s) {
  const int k = static_cast<int>(s.size());
  Mat<T> raw(k + 1, k + 1);
  Vec<T> rhs(k + 1);
  raw(0, 0) = T(1);
  rhs(0) = mean(i);
  for (int a = 0; a < k; ++a) {
    raw(0, a + 1) = mean(s[static_cast<std::size_t>(a)]);
    raw(a + 1, 0) = mean(s[static_cast<std::size_t>(a)]);
    rhs(a + 1) = cov(s[static_cast<std::size_t>(a)], i) + mean(s[static_cast<std::size_t>(a)]) * mean(i);
    for (int b = 0; b < k; ++b) {
      raw(a + 1, b + 1) = cov(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]) +
                          mean(s[static_cast<std::size_t>(a)]) * mean(s[static_cast<std::size_t>(b)]);
    }
  }
  return gaussian_solve<T>(std::move(raw), std::move(rhs));
}

// Small deterministic rational parameter draw: coefficients p/8 with p in
// [-12, 12] minus {0}, unit-diagonal sigma with bidirected entries q/16,
// |q| <= 7, which keeps every 2x2 principal minor positive.
struct RationalDraw {
  Mat<Rational> a;
  Mat<Rational> sigma;
};

inline RationalDraw rational_draw(const seldoor::Admg& g, std::uint64_t seed) {
  auto next = [state = seed]() mutable {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return state >> 33;
  };
  const int n = g.vertex_count();
  RationalDraw out;
  out.a = Mat<Rational>(n, n);
  out.sigma = Mat<Rational>(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.a(i, j) = Rational(0);
      out.sigma(i, j) = i == j ? Rational(1) : Rational(0);
    }
  }
  for (const auto& e : g.directed()) {
    const int p = static_cast<int>(next() % 24) - 12;
    out.a(e.to, e.from) = Rational(p >= 0 ? p + 1 : p, 8);
  }
  for (const auto& e : g.bidirected()) {
    const int q = static_cast<int>(next() % 14) - 7;
    const Rational v(q >= 0 ? q + 1 : q, 16);
    out.sigma(e.a, e.b) = v;
    out.sigma(e.b, e.a) = v;
  }
  return out;
}

}  // namespace oracles
