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


#ifndef DISA_TESTS_REINFORCE_ORACLE_HPP
#define DISA_TESTS_REINFORCE_ORACLE_HPP

// Exact expected-reward gradient by enumerating every tone sequence of a
// short sentence. The critic state never depends on policy parameters, so
// grad E[R] = sum_seq P(seq) R(seq) sum_t grad log pi(a_t | S_t).

#include <cmath>
#include <vector>

#include "disa/model.hpp"

namespace disa::oracle {

struct ExactPolicyGradient {
  num::Matrix W;
  num::Vector b;
  double expected_reward = 0;
  double total_probability = 0;
  std::size_t sequences = 0;
};

namespace detail {

struct Frame {
  num::Vector S;
  num::Vector gz;
};

inline void enumerate(const model::DisaModel& m, const model::ToneOptions& s, int label, std::size_t t,
                      const num::Vector& h, const num::Vector& c, double prob, std::vector<Frame>& path,
                      ExactPolicyGradient& out) {
  if (t == s.rows.size()) {
    const num::Vector distr = num::softmax(m.W_sfmx * h + m.b_sfmx);
    const double R = std::log(distr(label));
    out.expected_reward += prob * R;
    out.total_probability += prob;
    ++out.sequences;
    for (const auto& f : path) {
      out.W += (prob * R) * f.gz * f.S.transpose();
      out.b += (prob * R) * f.gz;
    }
    return;
  }
  const num::Vector& x = *s.rows[t][static_cast<std::size_t>(s.teacher[t])];
  num::Vector S(x.size() + h.size() + c.size());
  S << x, h, c;
  const num::Vector u = (m.policy_W * S + m.policy_b).array().tanh().matrix();
  const num::Vector p = (u.array() - u.maxCoeff()).exp().matrix();
  const num::Vector probs = p / p.sum();
  for (int a = 0; a < model::kActions; ++a) {
    num::Vector gz = -probs;
    gz(a) += 1.0;
    gz = gz.cwiseProduct((1.0 - u.array().square()).matrix());
    path.push_back({S, gz});
    const auto next = num::lstm_step(m.critic, *s.rows[t][static_cast<std::size_t>(a)], h, c);
    enumerate(m, s, label, t + 1, next.h, next.c, prob * probs(a), path, out);
    path.pop_back();
  }
}

}  // namespace detail

inline ExactPolicyGradient exact_policy_gradient(const model::DisaModel& m, const model::ToneOptions& s, int label) {
  ExactPolicyGradient out{num::Matrix::Zero(model::kActions, m.state_dim()), num::Vector::Zero(model::kActions)};
  std::vector<detail::Frame> path;
  const num::Vector z = num::Vector::Zero(m.hidden_dim());
  detail::enumerate(m, s, label, 0, z, z, 1.0, path, out);
  return out;
}

/// Expected reward alone, for finite-difference checks of the gradient.
inline double expected_reward(const model::DisaModel& m, const model::ToneOptions& s, int label) {
  return exact_policy_gradient(m, s, label).expected_reward;
}

/// Worst relative error of `est` against `exact` over coordinates with
/// |exact| > floor; also reports how many coordinates qualified.
struct Agreement {
  double max_rel_error = 0;
  std::size_t compared = 0;
};

inline Agreement compare(const ExactPolicyGradient& exact, const model::PolicyGrad& est, double floor) {
  Agreement a;
  const auto one = [&](double e, double g) {
    if (std::abs(e) <= floor) return;
    ++a.compared;
    a.max_rel_error = std::max(a.max_rel_error, std::abs(g - e) / std::abs(e));
  };
  for (Eigen::Index i = 0; i < exact.W.size(); ++i) one(exact.W.data()[i], est.W.data()[i]);
  for (Eigen::Index i = 0; i < exact.b.size(); ++i) one(exact.b(i), est.b(i));
  return a;
}

/// A sentence together with the feature rows it points into.
struct OracleInstance {
  model::DisaModel model;
  std::vector<num::Vector> features;
  model::ToneOptions sentence;
  int label = 0;
};

/// High signal-to-noise instance of length L in 1..3. At the first
/// character only tones 1 and 3 are live (the rest have saturated logits)
/// and tone 1 alone carries a "wrong" flag that the critic remembers and the
/// classifier punishes. Later characters are tone-invariant with saturated
/// policies, so the critic state still depends on the first action but every
/// informative coordinate sees one Bernoulli outcome.
inline OracleInstance snr_instance(int length) {
  if (length < 1 || length > 3) throw InvalidArgument("oracle instances have 1 to 3 characters");
  OracleInstance I;
  I.model = model::DisaModel(3, 1, 2);
  auto& m = I.model;
  m.critic.b_f.setConstant(6);
  m.critic.b_i.setConstant(6);
  m.critic.b_o.setConstant(6);
  m.critic.W_c(0, 0) = 2;
  m.W_sfmx(0, 0) = -7.4;
  m.W_sfmx(1, 0) = 7.4;
  m.b_sfmx(0) = 8;
  m.policy_b << -8, 0.9, -8, -0.5, -8;
  m.policy_W(1, 1) = 0.2;
  m.policy_W(3, 1) = -0.1;
  m.policy_W(1, 2) = 6;
  m.policy_W(3, 2) = -6;
  const auto L = static_cast<std::size_t>(length);
  I.features.resize(5 * L, num::Vector::Zero(3));
  for (std::size_t t = 0; t < L; ++t) {
    std::array<const num::Vector*, model::kActions> row{};
    for (std::size_t a = 0; a < 5; ++a) {
      auto& f = I.features[5 * t + a];
      if (t == 0) {
        f(0) = a == 1 ? 1.0 : 0.0;
        f(1) = 1.0;
      } else {
        f(2) = 1.0;
      }
      row[a] = &f;
    }
    I.sentence.chars.push_back(0x4E00 + static_cast<char32_t>(t));
    I.sentence.rows.push_back(row);
    I.sentence.teacher.push_back(3);
  }
  return I;
}

}  // namespace disa::oracle

#endif  // DISA_TESTS_REINFORCE_ORACLE_HPP
