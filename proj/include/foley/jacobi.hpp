#pragma once

#include "foley/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace foley {

template <typename Scalar>
struct SymmetricEigen {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eigenvalues;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> eigenvectors;  // columns
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Sweeps stop once
/// the off-diagonal Frobenius mass drops below tol * max(1, ||A||_F).
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> jacobi_eigen(const Eigen::MatrixBase<Derived>& input,
                                                      typename Derived::Scalar tol = 1e-12,
                                                      int max_sweeps = 100) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (input.rows() != input.cols()) throw PreconditionError("jacobi_eigen: matrix must be square");

  const Eigen::Index n = input.rows();
  Mat a = (input + input.transpose()) / Scalar(2);
  Mat v = Mat::Identity(n, n);

  auto off_diagonal = [&a, n] {
    Scalar s(0);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  const Scalar threshold = tol * std::max(Scalar(1), a.norm());
  SymmetricEigen<Scalar> result;
  while (off_diagonal() >= threshold) {
    if (result.sweeps == max_sweeps) throw NumericError("jacobi_eigen: no convergence");
    ++result.sweeps;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == Scalar(0)) continue;
        Eigen::JacobiRotation<Scalar> rot;
        rot.makeJacobi(a, p, q);
        a.applyOnTheLeft(p, q, rot.adjoint());
        a.applyOnTheRight(p, q, rot);
        v.applyOnTheRight(p, q, rot);
        a(p, q) = a(q, p) = Scalar(0);
      }
    }
  }
  result.eigenvalues = a.diagonal();
  result.eigenvectors = std::move(v);
  return result;
}

/// Square root of a symmetric positive semi-definite matrix through its
/// eigendecomposition. Eigenvalues below -neg_tol * max(1, lambda_max) are
/// rejected; smaller negative values are clipped to zero.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> psd_sqrt(
    const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar neg_tol = 1e-10) {
  using Scalar = typename Derived::Scalar;
  const SymmetricEigen<Scalar> eig = jacobi_eigen(m);
  const Scalar scale = std::max(Scalar(1), eig.eigenvalues.maxCoeff());
  if (eig.eigenvalues.minCoeff() < -neg_tol * scale)
    throw NumericError("psd_sqrt: matrix is indefinite beyond tolerance");
  const auto roots = eig.eigenvalues.cwiseMax(Scalar(0)).cwiseSqrt();
  return eig.eigenvectors * roots.asDiagonal() * eig.eigenvectors.transpose();
}

}  // namespace foley
