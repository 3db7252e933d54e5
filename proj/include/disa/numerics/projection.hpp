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


#ifndef DISA_NUMERICS_PROJECTION_HPP
#define DISA_NUMERICS_PROJECTION_HPP

// 2-D projections used to export embedding plots: PCA and exact t-SNE.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "disa/numerics/svd.hpp"

namespace disa::num {

enum class ProjectionMethod { pca, tsne };

struct TsneOptions {
  double perplexity = 30.0;
  int iterations = 1000;
  int exaggeration_iterations = 250;
  double exaggeration = 12.0;
  double learning_rate = 0.0;  // 0 = max(N / exaggeration / 4, 50)
};

using Point2 = std::pair<double, double>;

namespace detail {

inline Matrix stack_rows(const std::vector<Vector>& vectors) {
  if (vectors.size() < 3) throw InvalidArgument("projection needs at least 3 vectors");
  const auto D = vectors.front().size();
  if (D < 2) throw ShapeError("projection needs vectors of dimension >= 2");
  Matrix X(static_cast<Eigen::Index>(vectors.size()), D);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != D) throw ShapeError("projection vectors must share one dimension");
    X.row(static_cast<Eigen::Index>(i)) = vectors[i].transpose();
  }
  require_finite(view(X), "projection input");
  return X;
}

inline std::vector<Point2> to_points(const Matrix& Y) {
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(Y.rows()));
  for (Eigen::Index i = 0; i < Y.rows(); ++i) out.emplace_back(Y(i, 0), Y(i, 1));
  return out;
}

/// Row-conditional Gaussian affinities whose entropy matches log(perplexity),
/// found by bisection on the precision.
inline Matrix conditional_affinities(const Matrix& sq_dist, double perplexity) {
  const auto n = sq_dist.rows();
  Matrix P = Matrix::Zero(n, n);
  const double target = std::log(perplexity);
  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0, lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 200; ++iter) {
      double sum = 0, weighted = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double p = std::exp(-beta * sq_dist(i, j));
        P(i, j) = p;
        sum += p;
        weighted += p * sq_dist(i, j);
      }
      if (sum <= std::numeric_limits<double>::min()) {
        // Precision too high for this row; back off.
        hi = beta;
        beta = std::isinf(lo) ? beta / 2.0 : (beta + lo) / 2.0;
        continue;
      }
      const double entropy = std::log(sum) + beta * weighted / sum;
      const double diff = entropy - target;
      for (Eigen::Index j = 0; j < n; ++j) P(i, j) /= sum;
      if (std::abs(diff) < 1e-10) break;
      if (diff > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
      } else {
        hi = beta;
        beta = std::isinf(lo) ? beta / 2.0 : (beta + lo) / 2.0;
      }
    }
    P(i, i) = 0.0;
  }
  return P;
}

}  // namespace detail

/// Projection onto the top two principal components, with the sign of each
/// axis fixed so that its largest-magnitude loading is positive.
inline std::vector<Point2> pca_2d(const std::vector<Vector>& vectors) {
  Matrix X = detail::stack_rows(vectors);
  const Eigen::RowVectorXd mean = X.colwise().mean();
  X.rowwise() -= mean;
  Svd s = svd(X);
  Matrix axes(X.cols(), 2);
  for (int k = 0; k < 2; ++k) {
    Vector a = s.V.col(k);
    Eigen::Index arg = 0;
    a.cwiseAbs().maxCoeff(&arg);
    if (a(arg) < 0) a = -a;
    axes.col(k) = a;
  }
  return detail::to_points(X * axes);
}

/// Exact t-SNE (full N x N affinities, no tree approximation). The
/// perplexity is capped at (N - 1) / 3.
inline std::vector<Point2> tsne_2d(const std::vector<Vector>& vectors, std::uint64_t seed, TsneOptions opt = {}) {
  const Matrix X = detail::stack_rows(vectors);
  const auto n = X.rows();
  const double perplexity = std::min(opt.perplexity, (static_cast<double>(n) - 1.0) / 3.0);
  const double lr = opt.learning_rate > 0 ? opt.learning_rate
                                          : std::max(static_cast<double>(n) / opt.exaggeration / 4.0, 50.0);

  Matrix sq(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) sq(i, j) = (X.row(i) - X.row(j)).squaredNorm();
  // Scale-free bisection start.
  const double max_sq = sq.maxCoeff();
  if (max_sq > 0) sq /= max_sq;

  Matrix P = detail::conditional_affinities(sq, perplexity);
  P = (P + P.transpose()) / (2.0 * static_cast<double>(n));
  P = P.cwiseMax(1e-12);

  Rng rng(seed);
  Matrix Y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 0; k < 2; ++k) Y(i, k) = 1e-4 * standard_normal(rng);
  Matrix update = Matrix::Zero(n, 2), gains = Matrix::Ones(n, 2), grad(n, 2), num(n, n);

  for (int iter = 0; iter < opt.iterations; ++iter) {
    const double exaggeration = iter < opt.exaggeration_iterations ? opt.exaggeration : 1.0;
    const double momentum = iter < opt.exaggeration_iterations ? 0.5 : 0.8;
    double z = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      num(i, i) = 0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double q = 1.0 / (1.0 + (Y.row(i) - Y.row(j)).squaredNorm());
        num(i, j) = num(j, i) = q;
        z += 2.0 * q;
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      double gx = 0, gy = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double mult = (exaggeration * P(i, j) - num(i, j) / z) * num(i, j);
        gx += mult * (Y(i, 0) - Y(j, 0));
        gy += mult * (Y(i, 1) - Y(j, 1));
      }
      grad(i, 0) = 4.0 * gx;
      grad(i, 1) = 4.0 * gy;
    }
    for (Eigen::Index i = 0; i < n; ++i)
      for (int k = 0; k < 2; ++k) {
        const bool same_sign = (grad(i, k) > 0) == (update(i, k) > 0);
        gains(i, k) = same_sign ? std::max(gains(i, k) * 0.8, 0.01) : gains(i, k) + 0.2;
        update(i, k) = momentum * update(i, k) - lr * gains(i, k) * grad(i, k);
        Y(i, k) += update(i, k);
      }
    const Eigen::RowVector2d mean = Y.colwise().mean();
    Y.rowwise() -= mean;
  }
  return detail::to_points(Y);
}

inline std::vector<Point2> project_2d(const std::vector<Vector>& vectors, ProjectionMethod method, std::uint64_t seed,
                                      TsneOptions tsne = {}) {
  return method == ProjectionMethod::pca ? pca_2d(vectors) : tsne_2d(vectors, seed, tsne);
}

}  // namespace disa::num

#endif  // DISA_NUMERICS_PROJECTION_HPP
