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


#ifndef DISA_NUMERICS_OPTIMIZER_HPP
#define DISA_NUMERICS_OPTIMIZER_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "disa/numerics/tensor.hpp"

namespace disa::num {

enum class OptimizerKind { adam, adagrad };

/// One parameter block handed to an optimizer step. `decay` marks weight
/// matrices that receive the L2 term; biases leave it false.
struct ParamSlot {
  std::span<double> value;
  std::span<const double> grad;
  bool decay = true;
};

inline ParamSlot slot(Matrix& value, const Matrix& grad, bool decay = true) {
  return {mut_view(value), view(grad), decay};
}
inline ParamSlot slot(Vector& value, const Vector& grad, bool decay = false) {
  return {mut_view(value), view(grad), decay};
}

/// Adam (bias-corrected) or Adagrad. The accumulators are created on the
/// first step and must keep the same block layout afterwards.
class Optimizer {
 public:
  struct Config {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 0.001;
    double l2 = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  Optimizer() = default;
  explicit Optimizer(Config config) : config_(config) {
    if (config_.l2 < 0) throw RangeError("l2 must be non-negative");
  }

  static Optimizer adam(double lr, double l2 = 0.0) { return Optimizer({OptimizerKind::adam, lr, l2}); }
  static Optimizer adagrad(double lr, double l2 = 0.0) { return Optimizer({OptimizerKind::adagrad, lr, l2}); }

  const Config& config() const noexcept { return config_; }
  long long steps() const noexcept { return steps_; }

  /// Applies one descent step to every slot. Throws NonFiniteError before
  /// touching anything if a gradient is NaN or infinite.
  void step(std::span<const ParamSlot> slots) {
    for (const auto& s : slots) {
      if (s.value.size() != s.grad.size()) throw ShapeError("parameter and gradient sizes differ");
      require_finite(s.grad, "gradient");
    }
    if (first_.empty()) {
      for (const auto& s : slots) {
        first_.emplace_back(s.grad.size(), 0.0);
        if (config_.kind == OptimizerKind::adam) second_.emplace_back(s.grad.size(), 0.0);
      }
    } else if (first_.size() != slots.size()) {
      throw ShapeError("optimizer called with a different parameter layout");
    }
    ++steps_;
    const double t = static_cast<double>(steps_);
    const double c1 = 1.0 - std::pow(config_.beta1, t);
    const double c2 = 1.0 - std::pow(config_.beta2, t);
    for (std::size_t b = 0; b < slots.size(); ++b) {
      const auto& s = slots[b];
      auto& acc = first_[b];
      if (acc.size() != s.grad.size()) throw ShapeError("optimizer accumulator shape changed");
      const double l2 = s.decay ? config_.l2 : 0.0;
      for (std::size_t i = 0; i < s.grad.size(); ++i) {
        const double g = s.grad[i] + l2 * s.value[i];
        if (config_.kind == OptimizerKind::adam) {
          auto& v = second_[b];
          acc[i] = config_.beta1 * acc[i] + (1.0 - config_.beta1) * g;
          v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
          const double m_hat = acc[i] / c1;
          const double v_hat = v[i] / c2;
          s.value[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
        } else {
          acc[i] += g * g;
          s.value[i] -= config_.learning_rate * g / (std::sqrt(acc[i]) + config_.epsilon);
        }
      }
    }
  }

  void step(std::initializer_list<ParamSlot> slots) { step(std::span<const ParamSlot>(slots.begin(), slots.size())); }

 private:
  Config config_;
  long long steps_ = 0;
  std::vector<std::vector<double>> first_;   // adam m, or adagrad sum of squares
  std::vector<std::vector<double>> second_;  // adam v
};

}  // namespace disa::num

#endif  // DISA_NUMERICS_OPTIMIZER_HPP
