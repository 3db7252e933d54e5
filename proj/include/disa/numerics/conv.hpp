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


#ifndef DISA_NUMERICS_CONV_HPP
#define DISA_NUMERICS_CONV_HPP

// Valid-padding 2-D cross-correlation over [H, W, C] tensors with
// [k, k, Cin, Cout] kernels, lowered to a matrix product through im2col.

#include <string>

#include "disa/numerics/tensor.hpp"

namespace disa::num {

inline int conv_output_size(int in, int kernel, int stride) {
  if (kernel > in) throw ShapeError("kernel " + std::to_string(kernel) + " exceeds input " + std::to_string(in));
  if (kernel < 1 || stride < 1) throw ShapeError("kernel and stride must be positive");
  return (in - kernel) / stride + 1;
}

/// Patch matrix: one row per output position, columns ordered (kh, kw, cin)
/// to match the row-major kernel layout.
inline RowMajorMatrix im2col(const Tensor& input, int k, int stride, int out_h, int out_w) {
  const int in_w = input.dim(1), cin = input.dim(2);
  RowMajorMatrix cols(static_cast<Eigen::Index>(out_h) * out_w, static_cast<Eigen::Index>(k) * k * cin);
  const auto src = input.data();
  for (int oh = 0; oh < out_h; ++oh)
    for (int ow = 0; ow < out_w; ++ow) {
      double* row = cols.row(static_cast<Eigen::Index>(oh) * out_w + ow).data();
      for (int kh = 0; kh < k; ++kh) {
        const double* line = src.data() + (static_cast<std::size_t>(oh * stride + kh) * in_w + ow * stride) * cin;
        std::copy(line, line + static_cast<std::size_t>(k) * cin, row + static_cast<std::size_t>(kh) * k * cin);
      }
    }
  return cols;
}

inline void check_conv_operands(const Tensor& input, const Tensor& kernels) {
  if (input.rank() != 3) throw ShapeError("conv2d input must be [H, W, C]");
  if (kernels.rank() != 4 || kernels.dim(0) != kernels.dim(1))
    throw ShapeError("conv2d kernels must be [k, k, Cin, Cout]");
  if (kernels.dim(2) != input.dim(2))
    throw ShapeError("conv2d channel mismatch: input has " + std::to_string(input.dim(2)) + ", kernels expect " +
                     std::to_string(kernels.dim(2)));
}

/// Output is [floor((H-k)/s)+1, floor((W-k)/s)+1, Cout]; `bias` may be
/// empty or hold Cout entries.
inline Tensor conv2d_apply(const Tensor& input, const Tensor& kernels, int stride, const Vector& bias = Vector()) {
  check_conv_operands(input, kernels);
  const int k = kernels.dim(0), cout = kernels.dim(3);
  const int out_h = conv_output_size(input.dim(0), k, stride);
  const int out_w = conv_output_size(input.dim(1), k, stride);
  if (bias.size() != 0 && bias.size() != cout) throw ShapeError("conv2d bias must have Cout entries");
  Tensor out({out_h, out_w, cout});
  const RowMajorMatrix cols = im2col(input, k, stride, out_h, out_w);
  auto result = out.as_matrix();
  result.noalias() = cols * kernels.as_matrix();
  if (bias.size() != 0) result.rowwise() += bias.transpose();
  return out;
}

struct Conv2dBackward {
  Tensor d_input;
  Tensor d_kernels;
  Vector d_bias;
};

inline Conv2dBackward conv2d_backward(const Tensor& input, const Tensor& kernels, int stride, const Tensor& d_out) {
  check_conv_operands(input, kernels);
  const int k = kernels.dim(0), cin = input.dim(2);
  const int out_h = d_out.dim(0), out_w = d_out.dim(1);
  const int in_w = input.dim(1);
  const RowMajorMatrix cols = im2col(input, k, stride, out_h, out_w);
  const auto g = d_out.as_matrix();

  Conv2dBackward r{Tensor(input.shape()), Tensor(kernels.shape()), g.colwise().sum().transpose()};
  r.d_kernels.as_matrix().noalias() = cols.transpose() * g;
  const RowMajorMatrix d_cols = g * kernels.as_matrix().transpose();
  auto dst = r.d_input.data();
  for (int oh = 0; oh < out_h; ++oh)
    for (int ow = 0; ow < out_w; ++ow) {
      const double* row = d_cols.row(static_cast<Eigen::Index>(oh) * out_w + ow).data();
      for (int kh = 0; kh < k; ++kh) {
        double* line = dst.data() + (static_cast<std::size_t>(oh * stride + kh) * in_w + ow * stride) * cin;
        const double* src = row + static_cast<std::size_t>(kh) * k * cin;
        for (int j = 0; j < k * cin; ++j) line[j] += src[j];
      }
    }
  return r;
}

}  // namespace disa::num

#endif  // DISA_NUMERICS_CONV_HPP
