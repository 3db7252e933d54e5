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


#ifndef DISA_NUMERICS_TENSOR_HPP
#define DISA_NUMERICS_TENSOR_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "disa/error.hpp"

namespace disa::num {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// The one random engine used everywhere; seeded explicitly by callers.
using Rng = std::mt19937_64;

/// Uniform draw in [0, 1) built from 53 bits of the engine output, so the
/// stream is identical across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Standard normal via Box-Muller on `uniform01`.
inline double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

/// Fisher-Yates with `uniform_index`, reproducible across platforms.
template <class Range>
void shuffle(Range& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline std::span<const double> view(const Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
inline std::span<const double> view(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline std::span<double> mut_view(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
inline std::span<double> mut_view(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

inline void require_finite(std::span<const double> v, const char* what) {
  if (!all_finite(v)) throw NonFiniteError(std::string("non-finite values in ") + what);
}

inline Vector concat(std::initializer_list<const Vector*> parts) {
  Eigen::Index n = 0;
  for (const Vector* p : parts) n += p->size();
  Vector out(n);
  Eigen::Index at = 0;
  for (const Vector* p : parts) {
    out.segment(at, p->size()) = *p;
    at += p->size();
  }
  return out;
}

/// Dense row-major n-d array. Shapes are positive; entries finite.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(checked_size(shape_), 0.0);
  }

  Tensor(std::vector<int> shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_size(shape_) != data_.size()) throw ShapeError("tensor data length does not match shape");
    require_finite(data_, "tensor");
  }

  const std::vector<int>& shape() const noexcept { return shape_; }
  int dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(int i, int j, int k) { return data_[index3(i, j, k)]; }
  double at(int i, int j, int k) const { return data_[index3(i, j, k)]; }

  double& at(int i, int j, int k, int l) {
    return data_[((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }
  double at(int i, int j, int k, int l) const {
    return data_[((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }

  /// Row-major matrix view with the last axis as columns.
  Eigen::Map<RowMajorMatrix> as_matrix() {
    const auto cols = static_cast<Eigen::Index>(shape_.back());
    return {data_.data(), static_cast<Eigen::Index>(data_.size()) / cols, cols};
  }
  Eigen::Map<const RowMajorMatrix> as_matrix() const {
    const auto cols = static_cast<Eigen::Index>(shape_.back());
    return {data_.data(), static_cast<Eigen::Index>(data_.size()) / cols, cols};
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  static std::size_t checked_size(const std::vector<int>& shape) {
    if (shape.empty()) throw ShapeError("tensor shape must be non-empty");
    std::size_t n = 1;
    for (int d : shape) {
      if (d <= 0) throw ShapeError("tensor dimensions must be positive");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::size_t index3(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k;
  }

  std::vector<int> shape_;
  std::vector<double> data_;
};

}  // namespace disa::num

#endif  // DISA_NUMERICS_TENSOR_HPP
