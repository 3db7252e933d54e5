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


#ifndef DISA_NUMERICS_LAYERS_HPP
#define DISA_NUMERICS_LAYERS_HPP

// Dense layers with hand-written backward passes. Each backward takes the
// values cached by its forward and the upstream gradient, and returns or
// accumulates parameter gradients; the caller chains them.

#include <cmath>
#include <string>

#include "disa/numerics/tensor.hpp"

namespace disa::num {

enum class Activation { none, tanh, sigmoid, relu };

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline Vector sigmoid(const Vector& x) { return x.unaryExpr([](double v) { return sigmoid(v); }); }

inline Vector activate(const Vector& pre, Activation act) {
  switch (act) {
    case Activation::none: return pre;
    case Activation::tanh: return pre.array().tanh().matrix();
    case Activation::sigmoid: return sigmoid(pre);
    case Activation::relu: return pre.cwiseMax(0.0);
  }
  return pre;
}

/// d(activation)/d(pre) expressed through the activation output `y`.
inline Vector activation_derivative(const Vector& y, Activation act) {
  switch (act) {
    case Activation::none: return Vector::Ones(y.size());
    case Activation::tanh: return (1.0 - y.array().square()).matrix();
    case Activation::sigmoid: return (y.array() * (1.0 - y.array())).matrix();
    case Activation::relu: return (y.array() > 0.0).cast<double>().matrix();
  }
  return Vector::Ones(y.size());
}

inline Vector affine_apply(const Matrix& W, const Vector& b, const Vector& x, Activation act = Activation::none) {
  if (W.cols() != x.size() || W.rows() != b.size())
    throw ShapeError("affine: W is " + std::to_string(W.rows()) + "x" + std::to_string(W.cols()) + ", b has " +
                     std::to_string(b.size()) + ", x has " + std::to_string(x.size()));
  return activate(W * x + b, act);
}

struct AffineGrad {
  Matrix dW;
  Vector db;
  Vector dx;
};

/// Backward of `affine_apply` given its input `x`, output `y` and dL/dy.
inline AffineGrad affine_backward(const Matrix& W, const Vector& x, const Vector& y, Activation act, const Vector& dy) {
  const Vector dpre = dy.cwiseProduct(activation_derivative(y, act));
  return {dpre * x.transpose(), dpre, W.transpose() * dpre};
}

/// Numerically stable softmax.
inline Vector softmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  Vector e = (logits.array() - m).exp().matrix();
  return e / e.sum();
}

struct SoftmaxCrossEntropy {
  Vector distr;
  double loss = 0;
  Vector grad_logits;
};

inline SoftmaxCrossEntropy softmax_cross_entropy(const Vector& logits, Eigen::Index target) {
  if (logits.size() < 2) throw ShapeError("softmax_cross_entropy needs at least two classes");
  if (target < 0 || target >= logits.size()) throw RangeError("target class out of range");
  require_finite(view(logits), "logits");
  const double m = logits.maxCoeff();
  const Vector shifted = (logits.array() - m).matrix();
  const double lse = std::log(shifted.array().exp().sum());
  SoftmaxCrossEntropy out;
  out.distr = (shifted.array() - lse).exp().matrix();
  out.loss = lse - shifted(target);
  out.grad_logits = out.distr;
  out.grad_logits(target) -= 1.0;
  return out;
}

// ---------------------------------------------------------------------------
// LSTM cell. Every gate reads the concatenation [x_t, h_{t-1}].

struct LstmParams {
  Matrix W_f, W_i, W_c, W_o;  // H x (d + H)
  Vector b_f, b_i, b_c, b_o;  // H

  LstmParams() = default;
  LstmParams(Eigen::Index input_dim, Eigen::Index hidden_dim) {
    if (input_dim < 1 || hidden_dim < 1) throw ShapeError("LSTM dimensions must be positive");
    for (Matrix* W : {&W_f, &W_i, &W_c, &W_o}) *W = Matrix::Zero(hidden_dim, input_dim + hidden_dim);
    for (Vector* b : {&b_f, &b_i, &b_c, &b_o}) *b = Vector::Zero(hidden_dim);
  }

  Eigen::Index hidden_dim() const noexcept { return W_f.rows(); }
  Eigen::Index input_dim() const noexcept { return W_f.cols() - W_f.rows(); }

  void set_zero() {
    for (Matrix* W : {&W_f, &W_i, &W_c, &W_o}) W->setZero();
    for (Vector* b : {&b_f, &b_i, &b_c, &b_o}) b->setZero();
  }

  void check() const {
    const auto H = W_f.rows();
    if (H < 1) throw ShapeError("LSTM hidden size must be positive");
    for (const Matrix* W : {&W_i, &W_c, &W_o})
      if (W->rows() != H || W->cols() != W_f.cols()) throw ShapeError("LSTM gate matrices must share one shape");
    for (const Vector* b : {&b_f, &b_i, &b_c, &b_o})
      if (b->size() != H) throw ShapeError("LSTM bias length must equal hidden size");
  }

  friend bool operator==(const LstmParams& a, const LstmParams& b) {
    return a.W_f == b.W_f && a.W_i == b.W_i && a.W_c == b.W_c && a.W_o == b.W_o && a.b_f == b.b_f &&
           a.b_i == b.b_i && a.b_c == b.b_c && a.b_o == b.b_o;
  }
};

/// Everything the backward pass needs from one forward step.
struct LstmStepCache {
  Vector z;  // [x, h_prev]
  Vector f, i, c_tilde, o;
  Vector c_prev, c, tanh_c, h;
};

inline LstmStepCache lstm_step_cached(const LstmParams& p, const Vector& x, const Vector& h_prev, const Vector& c_prev) {
  const auto H = p.hidden_dim();
  if (x.size() != p.input_dim() || h_prev.size() != H || c_prev.size() != H)
    throw ShapeError("lstm_step: expected x of " + std::to_string(p.input_dim()) + " and state of " +
                     std::to_string(H) + ", got " + std::to_string(x.size()) + "/" + std::to_string(h_prev.size()) +
                     "/" + std::to_string(c_prev.size()));
  LstmStepCache s;
  s.z = concat({&x, &h_prev});
  s.f = sigmoid(p.W_f * s.z + p.b_f);
  s.i = sigmoid(p.W_i * s.z + p.b_i);
  s.c_tilde = (p.W_c * s.z + p.b_c).array().tanh().matrix();
  s.o = sigmoid(p.W_o * s.z + p.b_o);
  s.c_prev = c_prev;
  s.c = s.f.cwiseProduct(c_prev) + s.i.cwiseProduct(s.c_tilde);
  s.tanh_c = s.c.array().tanh().matrix();
  s.h = s.o.cwiseProduct(s.tanh_c);
  return s;
}

struct LstmState {
  Vector h;
  Vector c;
};

inline LstmState lstm_step(const LstmParams& p, const Vector& x, const Vector& h_prev, const Vector& c_prev) {
  auto s = lstm_step_cached(p, x, h_prev, c_prev);
  return {std::move(s.h), std::move(s.c)};
}

struct LstmStepBackward {
  Vector dx;
  Vector dh_prev;
  Vector dc_prev;
};

/// Accumulates parameter gradients into `grads` (same layout as params).
/// `dh` and `dc` are the total gradients arriving at h_t and C_t.
inline LstmStepBackward lstm_step_backward(const LstmParams& p, const LstmStepCache& s, const Vector& dh,
                                           const Vector& dc, LstmParams& grads) {
  const Vector d_o = dh.cwiseProduct(s.tanh_c);
  const Vector d_c =
      dc + dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());
  const Vector a_f = (d_c.cwiseProduct(s.c_prev).array() * s.f.array() * (1.0 - s.f.array())).matrix();
  const Vector a_i = (d_c.cwiseProduct(s.c_tilde).array() * s.i.array() * (1.0 - s.i.array())).matrix();
  const Vector a_c = (d_c.cwiseProduct(s.i).array() * (1.0 - s.c_tilde.array().square())).matrix();
  const Vector a_o = (d_o.array() * s.o.array() * (1.0 - s.o.array())).matrix();

  grads.W_f.noalias() += a_f * s.z.transpose();
  grads.W_i.noalias() += a_i * s.z.transpose();
  grads.W_c.noalias() += a_c * s.z.transpose();
  grads.W_o.noalias() += a_o * s.z.transpose();
  grads.b_f += a_f;
  grads.b_i += a_i;
  grads.b_c += a_c;
  grads.b_o += a_o;

  const Vector dz = p.W_f.transpose() * a_f + p.W_i.transpose() * a_i + p.W_c.transpose() * a_c +
                    p.W_o.transpose() * a_o;
  const auto d = p.input_dim();
  return {dz.head(d), dz.tail(p.hidden_dim()), d_c.cwiseProduct(s.f)};
}

}  // namespace disa::num

#endif  // DISA_NUMERICS_LAYERS_HPP
