#pragma once

#include <Eigen/Core>

#include "seldoor/graph.hpp"

namespace seldoor {

template <class T>
using SquareMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using ColumnVector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Absolute pivot floor for symmetric factorizations.
inline constexpr double kPivotTol = 1e-12;

namespace detail {

// Everything here is written as explicit loops so the kernels instantiate
// for any ring-like scalar (double in production, exact rationals in the
// oracle tests), and so the arithmetic is exactly the documented recurrence.

// x solving (I - a) x = rhs by forward substitution; a strictly lower
// triangular.
template <class T>
void unit_lower_solve_into(const SquareMatrix<T>& a, const ColumnVector<T>& rhs,
                           ColumnVector<T>& x) {
  const Eigen::Index n = a.rows();
  x.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    T acc = rhs(i);
    for (Eigen::Index j = 0; j < i; ++j) acc += a(i, j) * x(j);
    x(i) = acc;
  }
}

template <class T>
ColumnVector<T> unit_lower_solve(const SquareMatrix<T>& a, const ColumnVector<T>& rhs) {
  ColumnVector<T> x;
  unit_lower_solve_into(a, rhs, x);
  return x;
}

// B = (I - a)^{-1}, column by column.
template <class T>
SquareMatrix<T> unit_lower_inverse(const SquareMatrix<T>& a) {
  const Eigen::Index n = a.rows();
  SquareMatrix<T> b(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      T acc = i == c ? T(1) : T(0);
      for (Eigen::Index j = 0; j < i; ++j) acc += a(i, j) * b(j, c);
      b(i, c) = acc;
    }
  }
  return b;
}

// Column `source` of (I - a')^{-1} where a' is a with the rows in `zeroed`
// replaced by zero; the entry at `target` is the interventional total
// effect.
template <class T>
void controlled_effect_column_into(const SquareMatrix<T>& a, VertexMask zeroed, int source,
                                   ColumnVector<T>& x) {
  const Eigen::Index n = a.rows();
  x.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    T acc = i == source ? T(1) : T(0);
    if (!(zeroed & bit(static_cast<int>(i)))) {
      for (Eigen::Index j = 0; j < i; ++j) acc += a(i, j) * x(j);
    }
    x(i) = acc;
  }
}

template <class T>
T controlled_effect_entry(const SquareMatrix<T>& a, VertexMask zeroed, int source, int target) {
  ColumnVector<T> x;
  controlled_effect_column_into(a, zeroed, source, x);
  return x(target);
}

// LDL^T factorization with an absolute pivot floor. Returns false when a
// pivot is not strictly above `tol`, which doubles as the positive
// definiteness check. l is unit lower triangular, d the pivot vector.
template <class T>
bool ldlt_factor(const SquareMatrix<T>& m, const T& tol, SquareMatrix<T>& l, ColumnVector<T>& d) {
  const Eigen::Index n = m.rows();
  l.resize(n, n);
  d.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      T acc = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) acc -= l(i, k) * l(j, k) * d(k);
      if (i == j) {
        if (!(acc > tol)) return false;
        d(i) = acc;
        l(i, i) = T(1);
      } else {
        l(i, j) = acc / d(j);
      }
    }
    for (Eigen::Index j = i + 1; j < n; ++j) l(i, j) = T(0);
  }
  return true;
}

template <class T>
bool is_positive_definite(const SquareMatrix<T>& m, const T& tol) {
  SquareMatrix<T> l;
  ColumnVector<T> d;
  return ldlt_factor(m, tol, l, d);
}

// Solves m x = rhs for symmetric positive definite m via the LDL^T factor.
// Returns false when the factorization hits the pivot floor.
template <class T>
bool ldlt_solve(const SquareMatrix<T>& m, const ColumnVector<T>& rhs, const T& tol,
                ColumnVector<T>& x) {
  SquareMatrix<T> l;
  ColumnVector<T> d;
  if (!ldlt_factor(m, tol, l, d)) return false;
  const Eigen::Index n = m.rows();
  ColumnVector<T> y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    T acc = rhs(i);
    for (Eigen::Index j = 0; j < i; ++j) acc -= l(i, j) * y(j);
    y(i) = acc;
  }
  x.resize(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    T acc = y(i) / d(i);
    for (Eigen::Index j = i + 1; j < n; ++j) acc -= l(j, i) * x(j);
    x(i) = acc;
  }
  return true;
}

}  // namespace detail

}  // namespace seldoor
