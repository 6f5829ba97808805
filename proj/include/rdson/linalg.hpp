#pragma once

// Dense kernels used by the recurrent cells. Storage is Eigen with row-major
// matrices; every free function checks shapes and throws ShapeError.

#include <Eigen/Dense>
#include <cmath>
#include <concepts>
#include <string>

#include "rdson/errors.hpp"

namespace rdson {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixD = Matrix<double>;
using VectorD = Vector<double>;

namespace detail {

inline std::string shape_str(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace detail

template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> matmul(const Eigen::MatrixBase<DerivedA>& a,
                                         const Eigen::MatrixBase<DerivedB>& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: cannot multiply " + detail::shape_str(a.rows(), a.cols()) + " by " +
                     detail::shape_str(b.rows(), b.cols()));
  }
  return a * b;
}

template <typename Scalar>
Vector<Scalar> matvec(const Matrix<Scalar>& a, const Vector<Scalar>& x) {
  if (a.cols() != x.size()) {
    throw ShapeError("matvec: cannot multiply " + detail::shape_str(a.rows(), a.cols()) +
                     " by vector of length " + std::to_string(x.size()));
  }
  return a * x;
}

template <typename Scalar>
Vector<Scalar> hadamard(const Vector<Scalar>& a, const Vector<Scalar>& b) {
  if (a.size() != b.size()) {
    throw ShapeError("hadamard: length mismatch " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  return a.cwiseProduct(b);
}

template <typename Scalar>
Vector<Scalar> add(const Vector<Scalar>& a, const Vector<Scalar>& b) {
  if (a.size() != b.size()) {
    throw ShapeError("add: length mismatch " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  return a + b;
}

/// a's entries first, then b's.
template <typename Scalar>
Vector<Scalar> concat(const Vector<Scalar>& a, const Vector<Scalar>& b) {
  Vector<Scalar> out(a.size() + b.size());
  out << a, b;
  return out;
}

template <typename Derived>
typename Derived::PlainObject scale(const Eigen::MatrixBase<Derived>& a, typename Derived::Scalar s) {
  return a * s;
}

/// Logistic function with the overflow-free branch for negative inputs.
template <std::floating_point Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= Scalar(0)) {
    return Scalar(1) / (Scalar(1) + std::exp(-x));
  }
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <typename Derived>
typename Derived::PlainObject sigmoid(const Eigen::MatrixBase<Derived>& v) {
  return v.unaryExpr([](typename Derived::Scalar x) { return sigmoid(x); });
}

template <typename Derived>
typename Derived::PlainObject tanh_elem(const Eigen::MatrixBase<Derived>& v) {
  return v.unaryExpr([](typename Derived::Scalar x) { return std::tanh(x); });
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace rdson
