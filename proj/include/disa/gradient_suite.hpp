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


#ifndef DISA_GRADIENT_SUITE_HPP
#define DISA_GRADIENT_SUITE_HPP

// Finite-difference checks of every hand-written backward pass: affine,
// softmax cross-entropy, a 3-step LSTM, the critic with classifier, a toy
// convAE, a GloVe cell and the log-policy.

#include <functional>
#include <string>
#include <vector>

#include "disa/embeddings.hpp"
#include "disa/model.hpp"
#include "disa/numerics/gradcheck.hpp"
#include "disa/visual.hpp"

namespace disa::gradsuite {

struct CaseResult {
  std::string name;
  double max_rel_error = 0;
  double tolerance = 0;
  std::size_t coordinates = 0;
  bool passed() const { return max_rel_error <= tolerance; }
};

inline constexpr double kTolerance = 1e-4;
inline constexpr double kLinearTolerance = 1e-6;

namespace detail {

inline num::Vector random_vector(Eigen::Index n, num::Rng& rng, double scale = 1.0) {
  num::Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * num::standard_normal(rng);
  return v;
}

inline num::Matrix random_matrix(Eigen::Index r, Eigen::Index c, num::Rng& rng, double scale = 1.0) {
  num::Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = scale * num::standard_normal(rng);
  return m;
}

/// Worst error over several parameter blocks of one case.
class Accumulator {
 public:
  Accumulator(std::string name, double tol, std::uint64_t seed) : r_{std::move(name), 0, tol, 0}, seed_(seed) {}

  void check(const std::function<double()>& loss, std::span<double> params, std::span<const double> grad) {
    const auto g = num::finite_diff_check(loss, params, grad, r_.tolerance, seed_++);
    r_.max_rel_error = std::max(r_.max_rel_error, g.max_rel_error);
    r_.coordinates += g.coordinates;
  }

  CaseResult result() const { return r_; }

 private:
  CaseResult r_;
  std::uint64_t seed_;
};

}  // namespace detail

inline CaseResult check_affine(num::Activation act, std::uint64_t seed) {
  using namespace detail;
  num::Rng rng(seed);
  num::Matrix W = random_matrix(4, 6, rng, 0.5);
  num::Vector b = random_vector(4, rng, 0.5), x = random_vector(6, rng);
  const num::Vector c = random_vector(4, rng);
  const bool linear = act == num::Activation::none;
  const auto loss = [&] { return c.dot(num::affine_apply(W, b, x, act)); };
  const auto y = num::affine_apply(W, b, x, act);
  const auto g = num::affine_backward(W, x, y, act, c);
  Accumulator acc(linear ? "affine" : "affine+tanh", linear ? kLinearTolerance : kTolerance, seed);
  acc.check(loss, num::mut_view(W), num::view(g.dW));
  acc.check(loss, num::mut_view(b), num::view(g.db));
  acc.check(loss, num::mut_view(x), num::view(g.dx));
  return acc.result();
}

inline CaseResult check_softmax_ce(std::uint64_t seed) {
  num::Rng rng(seed);
  num::Vector z = detail::random_vector(5, rng, 2.0);
  const auto loss = [&] { return num::softmax_cross_entropy(z, 2).loss; };
  const auto g = num::softmax_cross_entropy(z, 2).grad_logits;
  detail::Accumulator acc("softmax-ce", kTolerance, seed);
  acc.check(loss, num::mut_view(z), num::view(g));
  return acc.result();
}

/// L = a.h_3 + c.C_3 after three steps from zero state.
inline CaseResult check_lstm(std::uint64_t seed) {
  using namespace detail;
  num::Rng rng(seed);
  const int d = 3, H = 4, steps = 3;
  num::LstmParams p(d, H);
  for (num::Matrix* W : {&p.W_f, &p.W_i, &p.W_c, &p.W_o}) *W = random_matrix(H, d + H, rng, 0.5);
  for (num::Vector* v : {&p.b_f, &p.b_i, &p.b_c, &p.b_o}) *v = random_vector(H, rng, 0.5);
  std::vector<num::Vector> xs;
  for (int t = 0; t < steps; ++t) xs.push_back(random_vector(d, rng));
  const num::Vector a = random_vector(H, rng), cw = random_vector(H, rng);
  const auto loss = [&] {
    num::Vector h = num::Vector::Zero(H), c = num::Vector::Zero(H);
    for (const auto& x : xs) {
      auto s = num::lstm_step(p, x, h, c);
      h = s.h;
      c = s.c;
    }
    return a.dot(h) + cw.dot(c);
  };
  std::vector<num::LstmStepCache> caches;
  num::Vector h = num::Vector::Zero(H), c = num::Vector::Zero(H);
  for (const auto& x : xs) {
    caches.push_back(num::lstm_step_cached(p, x, h, c));
    h = caches.back().h;
    c = caches.back().c;
  }
  num::LstmParams g(d, H);
  std::vector<num::Vector> dx(steps);
  num::Vector dh = a, dc = cw;
  for (int t = steps; t-- > 0;) {
    auto back = num::lstm_step_backward(p, caches[static_cast<std::size_t>(t)], dh, dc, g);
    dx[static_cast<std::size_t>(t)] = back.dx;
    dh = back.dh_prev;
    dc = back.dc_prev;
  }
  Accumulator acc("lstm-3-step", kTolerance, seed);
  acc.check(loss, num::mut_view(p.W_f), num::view(g.W_f));
  acc.check(loss, num::mut_view(p.W_i), num::view(g.W_i));
  acc.check(loss, num::mut_view(p.W_c), num::view(g.W_c));
  acc.check(loss, num::mut_view(p.W_o), num::view(g.W_o));
  acc.check(loss, num::mut_view(p.b_f), num::view(g.b_f));
  acc.check(loss, num::mut_view(p.b_i), num::view(g.b_i));
  acc.check(loss, num::mut_view(p.b_c), num::view(g.b_c));
  acc.check(loss, num::mut_view(p.b_o), num::view(g.b_o));
  for (int t = 0; t < steps; ++t)
    acc.check(loss, num::mut_view(xs[static_cast<std::size_t>(t)]), num::view(dx[static_cast<std::size_t>(t)]));
  return acc.result();
}

/// Cross-entropy of the LSTM critic plus classifier over three steps.
inline CaseResult check_critic(std::uint64_t seed) {
  auto m = model::init_model(4, 3, 2, seed);
  num::Rng rng(seed + 1);
  std::vector<num::Vector> xs;
  for (int t = 0; t < 3; ++t) xs.push_back(detail::random_vector(4, rng));
  std::vector<const num::Vector*> px;
  for (const auto& x : xs) px.push_back(&x);
  model::CriticGrad g(m);
  model::critic_backward(m, px, 1, num::Vector(), g);
  const auto loss = [&] { return -std::log(model::critic_forward(m, px).distr(1)); };
  detail::Accumulator acc("critic-bptt", kTolerance, seed);
  acc.check(loss, num::mut_view(m.critic.W_f), num::view(g.lstm.W_f));
  acc.check(loss, num::mut_view(m.critic.W_c), num::view(g.lstm.W_c));
  acc.check(loss, num::mut_view(m.critic.b_o), num::view(g.lstm.b_o));
  acc.check(loss, num::mut_view(m.W_sfmx), num::view(g.W_sfmx));
  acc.check(loss, num::mut_view(m.b_sfmx), num::view(g.b_sfmx));
  return acc.result();
}

/// Toy architecture on 12x12 inputs: 12 -> 10 -> 4 -> 1.
inline vis::ConvAeArchitecture toy_convae_architecture() {
  vis::ConvAeArchitecture a;
  a.input_size = 12;
  a.encoder = {{3, 1, 3}, {4, 2, 4}, {4, 1, 6}};
  a.decoder = {10, 144};
  return a;
}

inline CaseResult check_convae(std::uint64_t seed) {
  auto m = vis::init_convae(toy_convae_architecture(), seed);
  for (auto& b : m.conv_bias) b.setConstant(0.05);
  for (auto& b : m.dense_b) b.setConstant(0.1);
  const auto bitmaps = vis::synthetic_bitmaps(1, seed, 12);
  vis::ConvAeGrad g(m);
  vis::accumulate_gradient(m, bitmaps[0], g);
  const auto loss = [&] { return vis::batch_loss(m, bitmaps); };
  auto params = m.parameter_blocks();
  const auto grads = g.blocks();
  detail::Accumulator acc("convae-12x12", kTolerance, seed);
  for (std::size_t i = 0; i < params.size(); ++i) acc.check(loss, params[i], grads[i]);
  return acc.result();
}

inline CaseResult check_glove_cell(std::uint64_t seed) {
  embed::CooccurrenceMatrix X;
  X.vocabulary = {"a", "b", "c"};
  const embed::Cell cell{0, 2, 3.5};
  X.cells = {cell};
  auto m = embed::init_glove(X, 6, seed);
  num::Rng rng(seed);
  for (Eigen::Index i = 0; i < m.W.size(); ++i) m.W.data()[i] = 0.5 * num::standard_normal(rng);
  for (Eigen::Index i = 0; i < m.W_ctx.size(); ++i) m.W_ctx.data()[i] = 0.5 * num::standard_normal(rng);
  const auto g = embed::glove_cell_gradient(m, cell);
  const auto loss = [&] { return embed::glove_loss(m, X); };
  const auto row = [](num::RowMajorMatrix& M, int i) {
    return std::span<double>(M.row(i).data(), static_cast<std::size_t>(M.cols()));
  };
  detail::Accumulator acc("glove-cell", kTolerance, seed);
  acc.check(loss, row(m.W, cell.i), num::view(g.d_w));
  acc.check(loss, row(m.W_ctx, cell.j), num::view(g.d_w_ctx));
  acc.check(loss, {&m.b(cell.i), 1}, {&g.d_b, 1});
  acc.check(loss, {&m.b_ctx(cell.j), 1}, {&g.d_b_ctx, 1});
  return acc.result();
}

/// d log pi(a|S) / d(W, b) for every action a.
inline CaseResult check_log_policy(std::uint64_t seed) {
  auto m = model::init_model(4, 3, 2, seed);
  num::Rng rng(seed + 2);
  const num::Vector S = detail::random_vector(m.state_dim(), rng);
  detail::Accumulator acc("log-policy", kTolerance, seed);
  for (int a = 0; a < model::kActions; ++a) {
    const auto po = model::policy_forward(m, S);
    const num::Vector gz = model::log_policy_pre_gradient(po, a);
    const num::Matrix gW = gz * S.transpose();
    const auto loss = [&] { return std::log(model::policy_distribution(m, S)(a)); };
    acc.check(loss, num::mut_view(m.policy_W), num::view(gW));
    acc.check(loss, num::mut_view(m.policy_b), num::view(gz));
  }
  return acc.result();
}

inline std::vector<CaseResult> run_all(std::uint64_t seed = 42) {
  return {check_affine(num::Activation::none, seed), check_affine(num::Activation::tanh, seed),
          check_softmax_ce(seed),                      check_lstm(seed),
          check_critic(seed),                          check_convae(seed),
          check_glove_cell(seed),                      check_log_policy(seed)};
}

}  // namespace disa::gradsuite

#endif  // DISA_GRADIENT_SUITE_HPP
