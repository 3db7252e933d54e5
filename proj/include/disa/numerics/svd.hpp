// Copyright 2026 The Disa Authors. All Rights Reserved.
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


#ifndef DISA_NUMERICS_SVD_HPP
#define DISA_NUMERICS_SVD_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "disa/numerics/tensor.hpp"

namespace disa::num {

/// Thin decomposition M = U diag(S) V^T with k = min(m, n) columns in U and V.
struct Svd {
  Matrix U;  // m x k
  Vector S;  // k, non-increasing, non-negative
  Matrix V;  // n x k
};

namespace detail {

/// Replaces the flagged columns of Q with unit vectors orthogonal to every
/// other column.
inline void complete_orthonormal(Matrix& Q, const std::vector<bool>& valid) {
  const auto m = Q.rows();
  Eigen::Index candidate = 0;
  for (Eigen::Index j = 0; j < Q.cols(); ++j) {
    if (valid[static_cast<std::size_t>(j)]) continue;
    for (; candidate < m; ++candidate) {
      Vector v = Vector::Unit(m, candidate);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index i = 0; i < Q.cols(); ++i) {
          if (i == j || (!valid[static_cast<std::size_t>(i)] && i > j)) continue;
          v -= Q.col(i).dot(v) * Q.col(i);
        }
      const double nv = v.norm();
      if (nv > 0.5) {
        Q.col(j) = v / nv;
        ++candidate;
        break;
      }
    }
  }
}

/// One-sided (Hestenes) Jacobi for m >= n.
inline Svd jacobi_tall(const Matrix& M) {
  const auto m = M.rows(), n = M.cols();
  Matrix A = M;
  Matrix V = Matrix::Identity(n, n);
  const double eps = 1e-15;
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = A.col(p).squaredNorm();
        const double beta = A.col(q).squaredNorm();
        const double gamma = A.col(p).dot(A.col(q));
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index i = 0; i < m; ++i) {
          const double ap = A(i, p), aq = A(i, q);
          A(i, p) = c * ap - s * aq;
          A(i, q) = s * ap + c * aq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double vp = V(i, p), vq = V(i, q);
          V(i, p) = c * vp - s * vq;
          V(i, q) = s * vp + c * vq;
        }
      }
    if (!rotated) break;
  }

  Vector norms(n);
  for (Eigen::Index j = 0; j < n; ++j) norms(j) = A.col(j).norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return norms(a) > norms(b); });

  Svd out{Matrix(m, n), Vector(n), Matrix(n, n)};
  const double top = n > 0 ? norms(order[0]) : 0.0;
  std::vector<bool> valid(static_cast<std::size_t>(n), true);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto src = order[static_cast<std::size_t>(j)];
    out.S(j) = norms(src);
    out.V.col(j) = V.col(src);
    if (norms(src) > 1e-300 && norms(src) > 1e-14 * top) {
      out.U.col(j) = A.col(src) / norms(src);
    } else {
      out.U.col(j).setZero();
      valid[static_cast<std::size_t>(j)] = false;
    }
  }
  complete_orthonormal(out.U, valid);
  return out;
}

}  // namespace detail

inline Svd svd(const Matrix& M) {
  if (M.rows() < 1 || M.cols() < 1) throw ShapeError("svd needs a non-empty matrix");
  require_finite(view(M), "svd input");
  if (M.rows() >= M.cols()) return detail::jacobi_tall(M);
  Svd t = detail::jacobi_tall(M.transpose());
  return {std::move(t.V), std::move(t.S), std::move(t.U)};
}

inline Vector singular_values(const Matrix& M) { return svd(M).S; }

}  // namespace disa::num

#endif  // DISA_NUMERICS_SVD_HPP
