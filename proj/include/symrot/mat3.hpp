// Copyright 2026 The symrot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <stdexcept>

namespace symrot {

template <typename T>
using Vector3 = Eigen::Matrix<T, 3, 1>;
template <typename T>
using Matrix3 = Eigen::Matrix<T, 3, 3>;

/// Packed symmetric 3x3 matrix: the row-major upper triangle
/// (A11, A12, A13, A22, A23, A33).
template <typename T>
using Vector6 = Eigen::Matrix<T, 6, 1>;

using Vector3d = Vector3<double>;
using Matrix3d = Matrix3<double>;
using Vector6d = Vector6<double>;

/// Symmetric eigendecomposition A = D diag(lambda) D^T with eigenvalues in
/// ascending order and a deterministic sign convention (see eig_sym3).
template <typename T>
struct EigSym3 {
  Vector3<T> lambda;
  Matrix3<T> vectors;
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite input");
  }
}

}  // namespace detail

/// Packs a symmetric matrix into its upper triangle, row-major.
template <typename Derived>
Vector6<typename Derived::Scalar> triu_pack(const Eigen::MatrixBase<Derived>& A) {
  detail::require_finite(A, "triu_pack");
  Vector6<typename Derived::Scalar> a;
  a << A(0, 0), A(0, 1), A(0, 2), A(1, 1), A(1, 2), A(2, 2);
  return a;
}

/// Inverse of triu_pack; the result is symmetric by construction.
template <typename Derived>
Matrix3<typename Derived::Scalar> triu_unpack(const Eigen::MatrixBase<Derived>& a) {
  detail::require_finite(a, "triu_unpack");
  Matrix3<typename Derived::Scalar> A;
  A << a(0), a(1), a(2),  //
      a(1), a(3), a(4),   //
      a(2), a(4), a(5);
  return A;
}

/// Eigendecomposition of a symmetric 3x3 matrix.
///
/// Eigenvalues are ascending. Each eigenvector's largest-magnitude component
/// is made non-negative (ties broken by lowest index), then the third column
/// is flipped if needed so det(D) = +1. Identical input bits produce
/// identical output bits.
template <typename T>
EigSym3<T> eig_sym3(const Matrix3<T>& A) {
  detail::require_finite(A, "eig_sym3");
  Eigen::SelfAdjointEigenSolver<Matrix3<T>> solver(A);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eig_sym3: eigensolver failed to converge");
  }
  EigSym3<T> out{solver.eigenvalues(), solver.eigenvectors()};
  for (int j = 0; j < 3; ++j) {
    int imax = 0;
    out.vectors.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.vectors(imax, j) < T(0)) out.vectors.col(j) = -out.vectors.col(j);
  }
  if (out.vectors.determinant() < T(0)) out.vectors.col(2) = -out.vectors.col(2);
  return out;
}

/// Builds the rotation [e_x, e_z x e_x, e_z] by normalizing e_x and projecting
/// e_z onto the plane orthogonal to it. The first column equals e_x/|e_x|
/// exactly.
template <typename T>
Matrix3<T> gram_schmidt_rotation(const Vector3<T>& e_x, const Vector3<T>& e_z) {
  detail::require_finite(e_x, "gram_schmidt_rotation");
  detail::require_finite(e_z, "gram_schmidt_rotation");
  const T nx = e_x.norm();
  const T nz = e_z.norm();
  if (nx <= T(1e-9) || nz <= T(1e-9)) {
    throw std::domain_error("gram_schmidt_rotation: degenerate frame (zero-length axis)");
  }
  const Vector3<T> xh = e_x / nx;
  if (std::abs(xh.dot(e_z)) / nz >= T(1) - T(1e-9)) {
    throw std::domain_error("gram_schmidt_rotation: degenerate frame (parallel axes)");
  }
  Vector3<T> z = e_z - xh.dot(e_z) * xh;
  z /= z.norm();
  Matrix3<T> R;
  R.col(0) = xh;
  R.col(1) = z.cross(xh);
  R.col(2) = z;
  return R;
}

}  // namespace symrot
