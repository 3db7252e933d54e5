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


#ifndef DISA_MODEL_HPP
#define DISA_MODEL_HPP

// Tone-selection policy, LSTM sentence critic with softmax classifier, and
// their updates.

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "disa/numerics/layers.hpp"
#include "disa/numerics/optimizer.hpp"
#include "disa/numerics/tensor.hpp"
#include "disa/pinyin.hpp"
#include "disa/text.hpp"

namespace disa::model {

inline constexpr int kActions = pinyin::kToneCount;

struct DisaModel {
  num::Matrix policy_W;  // 5 x (d + 2H)
  num::Vector policy_b;  // 5
  num::LstmParams critic;
  num::Matrix W_sfmx;  // X x H
  num::Vector b_sfmx;  // X

  DisaModel() = default;
  /// All-zero parameters.
  DisaModel(int input_dim, int hidden, int classes)
      : policy_W(num::Matrix::Zero(kActions, input_dim + 2 * hidden)),
        policy_b(num::Vector::Zero(kActions)),
        critic(input_dim, hidden),
        W_sfmx(num::Matrix::Zero(classes, hidden)),
        b_sfmx(num::Vector::Zero(classes)) {
    if (classes < 2) throw ShapeError("classifier needs at least two classes");
  }

  int input_dim() const { return static_cast<int>(critic.input_dim()); }
  int hidden_dim() const { return static_cast<int>(critic.hidden_dim()); }
  int classes() const { return static_cast<int>(W_sfmx.rows()); }
  int state_dim() const { return input_dim() + 2 * hidden_dim(); }

  friend bool operator==(const DisaModel& a, const DisaModel& b) {
    return a.policy_W == b.policy_W && a.policy_b == b.policy_b && a.critic == b.critic && a.W_sfmx == b.W_sfmx &&
           a.b_sfmx == b.b_sfmx;
  }
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
inline DisaModel init_model(int input_dim, int hidden, int classes, std::uint64_t seed) {
  DisaModel m(input_dim, hidden, classes);
  num::Rng rng(seed);
  const auto fill = [&](num::Matrix& W) {
    const double s = 1.0 / std::sqrt(static_cast<double>(W.cols()));
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = s * (2.0 * num::uniform01(rng) - 1.0);
  };
  fill(m.critic.W_f);
  fill(m.critic.W_i);
  fill(m.critic.W_c);
  fill(m.critic.W_o);
  fill(m.W_sfmx);
  fill(m.policy_W);
  return m;
}

/// S_t = x_t ⊕ h_{t-1} ⊕ C_{t-1}.
inline num::Vector make_state(const num::Vector& x, const num::Vector& h_prev, const num::Vector& c_prev) {
  if (h_prev.size() != c_prev.size()) throw ShapeError("hidden and cell states differ in length");
  num::require_finite(num::view(x), "policy state");
  return num::concat({&x, &h_prev, &c_prev});
}

struct PolicyOutput {
  num::Vector u;      // tanh(W S + b)
  num::Vector probs;  // softmax(u)
};

inline PolicyOutput policy_forward(const DisaModel& m, const num::Vector& state) {
  if (state.size() != m.state_dim())
    throw ShapeError("policy state has " + std::to_string(state.size()) + " entries, expected " +
                     std::to_string(m.state_dim()));
  num::require_finite(num::view(state), "policy state");
  PolicyOutput o;
  o.u = num::affine_apply(m.policy_W, m.policy_b, state, num::Activation::tanh);
  o.probs = num::softmax(o.u);
  return o;
}

inline num::Vector policy_distribution(const DisaModel& m, const num::Vector& state) {
  return policy_forward(m, state).probs;
}

/// d log pi(a|S) / d(W S + b).
inline num::Vector log_policy_pre_gradient(const PolicyOutput& o, int action) {
  num::Vector g = -o.probs;
  g(action) += 1.0;
  return g.cwiseProduct((1.0 - o.u.array().square()).matrix());
}

enum class SelectMode { sample, greedy };

/// Greedy: argmax, lowest index on ties. Sample: inverse CDF on one uniform.
inline int select_action(const num::Vector& probs, SelectMode mode, num::Rng& rng) {
  if (mode == SelectMode::greedy) {
    int best = 0;
    for (int a = 1; a < probs.size(); ++a)
      if (probs(a) > probs(best)) best = a;
    return best;
  }
  const double u = num::uniform01(rng);
  double cum = 0;
  for (int a = 0; a < probs.size(); ++a) {
    cum += probs(a);
    if (u < cum) return a;
  }
  return static_cast<int>(probs.size()) - 1;
}

struct CriticOutput {
  num::Vector h_last;
  num::Vector distr;
};

/// Inverted dropout mask with keep probability 1-rate (kept units scaled by
/// 1/(1-rate)).
inline num::Vector dropout_mask(Eigen::Index n, double rate, num::Rng& rng) {
  num::Vector m(n);
  for (Eigen::Index i = 0; i < n; ++i) m(i) = num::uniform01(rng) < rate ? 0.0 : 1.0 / (1.0 - rate);
  return m;
}

inline void check_sequence(const DisaModel& m, const std::vector<const num::Vector*>& xs) {
  if (xs.empty()) throw InvalidArgument("critic needs a non-empty sequence");
  for (const auto* x : xs)
    if (x->size() != m.input_dim())
      throw ShapeError("feature has " + std::to_string(x->size()) + " entries, critic expects " +
                       std::to_string(m.input_dim()));
}

/// Runs the LSTM from zero state; `mask` (empty = none) multiplies h_L
/// before the classifier.
inline CriticOutput critic_forward(const DisaModel& m, const std::vector<const num::Vector*>& xs,
                                   const num::Vector& mask = num::Vector()) {
  check_sequence(m, xs);
  num::Vector h = num::Vector::Zero(m.hidden_dim()), c = num::Vector::Zero(m.hidden_dim());
  for (const auto* x : xs) {
    auto s = num::lstm_step(m.critic, *x, h, c);
    h = std::move(s.h);
    c = std::move(s.c);
  }
  const num::Vector top = mask.size() ? num::Vector(h.cwiseProduct(mask)) : h;
  return {h, num::softmax(m.W_sfmx * top + m.b_sfmx)};
}

/// Training-mode forward draws a dropout mask from `rng`.
inline CriticOutput critic_forward(const DisaModel& m, const std::vector<const num::Vector*>& xs, bool training,
                                   num::Rng& rng, double dropout = 0.5) {
  return critic_forward(m, xs, training ? dropout_mask(m.hidden_dim(), dropout, rng) : num::Vector());
}

/// Classifier applied to the zero state, used for sentences with no
/// covered characters.
inline num::Vector prior_distribution(const DisaModel& m) { return num::softmax(m.b_sfmx); }

inline double compute_reward(const num::Vector& distr, int ground) {
  if (ground < 0 || ground >= distr.size()) throw RangeError("ground label outside the class range");
  return std::log(distr(ground));
}

struct CriticGrad {
  num::LstmParams lstm;
  num::Matrix W_sfmx;
  num::Vector b_sfmx;

  explicit CriticGrad(const DisaModel& m)
      : lstm(m.input_dim(), m.hidden_dim()),
        W_sfmx(num::Matrix::Zero(m.classes(), m.hidden_dim())),
        b_sfmx(num::Vector::Zero(m.classes())) {}

  void scale(double s) {
    for (num::Matrix* W : {&lstm.W_f, &lstm.W_i, &lstm.W_c, &lstm.W_o, &W_sfmx}) *W *= s;
    for (num::Vector* b : {&lstm.b_f, &lstm.b_i, &lstm.b_c, &lstm.b_o, &b_sfmx}) *b *= s;
  }
};

/// Cross-entropy loss of one sequence; accumulates its full BPTT gradient.
inline double critic_backward(const DisaModel& m, const std::vector<const num::Vector*>& xs, int label,
                              const num::Vector& mask, CriticGrad& g) {
  check_sequence(m, xs);
  if (label < 0 || label >= m.classes()) throw RangeError("label outside the class range");
  const auto H = m.hidden_dim();
  std::vector<num::LstmStepCache> caches;
  caches.reserve(xs.size());
  num::Vector h = num::Vector::Zero(H), c = num::Vector::Zero(H);
  for (const auto* x : xs) {
    caches.push_back(num::lstm_step_cached(m.critic, *x, h, c));
    h = caches.back().h;
    c = caches.back().c;
  }
  const num::Vector top = mask.size() ? num::Vector(h.cwiseProduct(mask)) : h;
  const auto ce = num::softmax_cross_entropy(m.W_sfmx * top + m.b_sfmx, label);
  g.W_sfmx.noalias() += ce.grad_logits * top.transpose();
  g.b_sfmx += ce.grad_logits;
  num::Vector dh = m.W_sfmx.transpose() * ce.grad_logits;
  if (mask.size()) dh = dh.cwiseProduct(mask);
  num::Vector dc = num::Vector::Zero(H);
  for (std::size_t t = caches.size(); t-- > 0;) {
    auto back = num::lstm_step_backward(m.critic, caches[t], dh, dc, g.lstm);
    dh = std::move(back.dh_prev);
    dc = std::move(back.dc_prev);
  }
  return ce.loss;
}

struct LabeledSequence {
  std::vector<const num::Vector*> features;
  int label = 0;
};

/// One descent step on the LSTM and classifier with the mean gradient of the
/// batch; the policy is not touched. Returns the mean loss before the step.
inline double critic_update(DisaModel& m, const std::vector<LabeledSequence>& batch, num::Optimizer& opt,
                            num::Rng* dropout_rng = nullptr, double dropout = 0.5) {
  if (batch.empty()) throw InvalidArgument("critic_update needs a non-empty batch");
  CriticGrad g(m);
  double loss = 0;
  for (const auto& s : batch) {
    const num::Vector mask = dropout_rng ? dropout_mask(m.hidden_dim(), dropout, *dropout_rng) : num::Vector();
    loss += critic_backward(m, s.features, s.label, mask, g);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  g.scale(inv);
  auto& p = m.critic;
  opt.step({num::slot(p.W_f, g.lstm.W_f), num::slot(p.W_i, g.lstm.W_i), num::slot(p.W_c, g.lstm.W_c),
            num::slot(p.W_o, g.lstm.W_o), num::slot(p.b_f, g.lstm.b_f), num::slot(p.b_i, g.lstm.b_i),
            num::slot(p.b_c, g.lstm.b_c), num::slot(p.b_o, g.lstm.b_o), num::slot(m.W_sfmx, g.W_sfmx),
            num::slot(m.b_sfmx, g.b_sfmx)});
  return loss * inv;
}

/// One policy rollout over a sentence. The state at step t is built from the
/// character's feature at its teacher tone and the critic's running state;
/// the chosen tone's feature is what the critic consumes.
struct Episode {
  std::vector<char32_t> chars;
  std::vector<num::Vector> states;
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<const num::Vector*> features;  // chosen-tone features
  num::Vector distr;
  int label = 0;
  double reward = 0;
};

/// Per-character tone rows: options[t][a] is the feature of character t at
/// tone a, teacher[t] its teacher tone.
struct ToneOptions {
  std::vector<char32_t> chars;
  std::vector<std::array<const num::Vector*, kActions>> rows;
  std::vector<int> teacher;
};

struct RolloutSettings {
  SelectMode mode = SelectMode::sample;
  bool uniform_exploration = false;
};

inline Episode run_episode(const DisaModel& m, const ToneOptions& sent, int label, const RolloutSettings& how,
                           num::Rng& rng) {
  if (sent.rows.empty()) throw InvalidArgument("episode needs a non-empty sentence");
  Episode ep;
  ep.chars = sent.chars;
  ep.label = label;
  const auto H = m.hidden_dim();
  num::Vector h = num::Vector::Zero(H), c = num::Vector::Zero(H);
  for (std::size_t t = 0; t < sent.rows.size(); ++t) {
    const num::Vector& x = *sent.rows[t][static_cast<std::size_t>(sent.teacher[t])];
    num::Vector S = make_state(x, h, c);
    const auto po = policy_forward(m, S);
    int a;
    if (how.uniform_exploration && how.mode == SelectMode::sample)
      a = static_cast<int>(num::uniform_index(rng, kActions));
    else
      a = select_action(po.probs, how.mode, rng);
    ep.log_probs.push_back(std::log(po.probs(a)));
    ep.actions.push_back(a);
    ep.states.push_back(std::move(S));
    const num::Vector* f = sent.rows[t][static_cast<std::size_t>(a)];
    ep.features.push_back(f);
    auto s = num::lstm_step(m.critic, *f, h, c);
    h = std::move(s.h);
    c = std::move(s.c);
  }
  ep.distr = num::softmax(m.W_sfmx * h + m.b_sfmx);
  ep.reward = compute_reward(ep.distr, label);
  if (!std::isfinite(ep.reward)) throw NonFiniteError("episode reward is not finite");
  return ep;
}

struct PolicyGrad {
  num::Matrix W;
  num::Vector b;
};

/// Mean over episodes of sum_t (R - baseline) * grad log pi(a_t | S_t).
inline PolicyGrad policy_gradient(const DisaModel& m, const std::vector<Episode>& episodes, double baseline = 0.0) {
  if (episodes.empty()) throw InvalidArgument("policy gradient needs a non-empty batch");
  PolicyGrad g{num::Matrix::Zero(kActions, m.state_dim()), num::Vector::Zero(kActions)};
  for (const auto& ep : episodes) {
    const double R = ep.reward - baseline;
    if (R == 0.0) continue;
    for (std::size_t t = 0; t < ep.states.size(); ++t) {
      const auto po = policy_forward(m, ep.states[t]);
      const num::Vector gz = R * log_policy_pre_gradient(po, ep.actions[t]);
      g.W.noalias() += gz * ep.states[t].transpose();
      g.b += gz;
    }
  }
  const double inv = 1.0 / static_cast<double>(episodes.size());
  g.W *= inv;
  g.b *= inv;
  return g;
}

/// Gradient ascent on the policy only (the optimizer descends on -grad).
inline PolicyGrad policy_gradient_update(DisaModel& m, const std::vector<Episode>& episodes, num::Optimizer& opt,
                                         double baseline = 0.0) {
  PolicyGrad g = policy_gradient(m, episodes, baseline);
  const num::Matrix nW = -g.W;
  const num::Vector nb = -g.b;
  opt.step({num::slot(m.policy_W, nW), num::slot(m.policy_b, nb)});
  return g;
}

// Checkpoint: "#disa-checkpoint v1", then per block
// "<name><TAB><rows><TAB><cols><TAB>v1,v2,..." in row-major order.

inline std::vector<std::pair<std::string, num::Matrix*>> matrix_blocks(DisaModel& m) {
  return {{"policy.W", &m.policy_W},       {"critic.W_f", &m.critic.W_f}, {"critic.W_i", &m.critic.W_i},
          {"critic.W_c", &m.critic.W_c},   {"critic.W_o", &m.critic.W_o}, {"classifier.W_sfmx", &m.W_sfmx}};
}

inline std::vector<std::pair<std::string, num::Vector*>> vector_blocks(DisaModel& m) {
  return {{"policy.b", &m.policy_b},     {"critic.b_f", &m.critic.b_f}, {"critic.b_i", &m.critic.b_i},
          {"critic.b_c", &m.critic.b_c}, {"critic.b_o", &m.critic.b_o}, {"classifier.b_sfmx", &m.b_sfmx}};
}

inline std::string serialize_checkpoint(const DisaModel& model, const std::map<std::string, std::string>& meta = {}) {
  DisaModel m = model;
  std::string out = "#disa-checkpoint v1\n";
  for (const auto& [k, v] : meta) out += "meta\t" + k + "\t" + v + "\n";
  const auto put = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols, auto at) {
    out += name + "\t" + std::to_string(rows) + "\t" + std::to_string(cols) + "\t";
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (r || c) out += ',';
        out += text::format_real(at(r, c));
      }
    out += '\n';
  };
  for (auto& [name, W] : matrix_blocks(m)) put(name, W->rows(), W->cols(), [&](auto r, auto c) { return (*W)(r, c); });
  for (auto& [name, b] : vector_blocks(m)) put(name, b->size(), 1, [&](auto r, auto) { return (*b)(r); });
  return out;
}

struct Checkpoint {
  DisaModel model;
  std::map<std::string, std::string> meta;
};

inline Checkpoint parse_checkpoint(const std::vector<std::string>& lines) {
  if (lines.empty() || lines[0] != "#disa-checkpoint v1") throw ParseError("not a DISA checkpoint", 0, 1);
  Checkpoint ck;
  std::map<std::string, std::pair<std::pair<Eigen::Index, Eigen::Index>, std::vector<double>>> blocks;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto f = text::split(lines[n], '\t');
    if (f[0] == "meta") {
      if (f.size() != 3) throw ParseError("bad meta line", 0, n + 1);
      ck.meta[f[1]] = f[2];
      continue;
    }
    if (f.size() != 4) throw ParseError("block line needs name, rows, cols, values", 0, n + 1);
    const auto rows = text::parse_int(f[1]), cols = text::parse_int(f[2]);
    const auto vals = text::split(f[3], ',');
    if (rows < 1 || cols < 1 || static_cast<long long>(vals.size()) != rows * cols)
      throw ParseError("block '" + f[0] + "' has " + std::to_string(vals.size()) + " values for " + f[1] + "x" + f[2],
                       0, n + 1);
    std::vector<double> v;
    v.reserve(vals.size());
    for (const auto& s : vals) v.push_back(text::parse_real(s));
    blocks[f[0]] = {{rows, cols}, std::move(v)};
  }
  const auto need = [&](const std::string& name) -> const auto& {
    auto it = blocks.find(name);
    if (it == blocks.end()) throw ParseError("checkpoint is missing block '" + name + "'", 0);
    return it->second;
  };
  const auto& wf = need("critic.W_f");
  const auto& ws = need("classifier.W_sfmx");
  const auto H = wf.first.first, d = wf.first.second - H, X = ws.first.first;
  if (d < 1 || H < 1) throw ParseError("checkpoint has inconsistent LSTM dimensions", 0);
  ck.model = DisaModel(static_cast<int>(d), static_cast<int>(H), static_cast<int>(X));
  for (auto& [name, W] : matrix_blocks(ck.model)) {
    const auto& [dims, v] = need(name);
    if (dims.first != W->rows() || dims.second != W->cols()) throw ParseError("block '" + name + "' has wrong dims", 0);
    for (Eigen::Index r = 0; r < W->rows(); ++r)
      for (Eigen::Index c = 0; c < W->cols(); ++c) (*W)(r, c) = v[static_cast<std::size_t>(r * W->cols() + c)];
  }
  for (auto& [name, b] : vector_blocks(ck.model)) {
    const auto& [dims, v] = need(name);
    if (dims.first != b->size() || dims.second != 1) throw ParseError("block '" + name + "' has wrong dims", 0);
    for (Eigen::Index r = 0; r < b->size(); ++r) (*b)(r) = v[static_cast<std::size_t>(r)];
  }
  ck.model.critic.check();
  return ck;
}

}  // namespace disa::model

#endif  // DISA_MODEL_HPP
