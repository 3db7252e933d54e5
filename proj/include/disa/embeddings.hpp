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


#ifndef DISA_EMBEDDINGS_HPP
#define DISA_EMBEDDINGS_HPP

// Co-occurrence counting and GloVe training for character and pinyin
// token embeddings.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "disa/feature_table.hpp"
#include "disa/numerics/tensor.hpp"
#include "disa/text.hpp"

namespace disa::embed {

using TokenLines = std::vector<std::vector<std::string>>;

/// Splits each line into whitespace-separated tokens.
inline TokenLines tokenize_words(const std::vector<std::string>& lines) {
  TokenLines out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(text::split_ws(l));
  return out;
}

/// One token per non-space character (textual embeddings are character level).
inline TokenLines tokenize_chars(const std::vector<std::string>& lines) {
  TokenLines out;
  out.reserve(lines.size());
  for (const auto& l : lines) {
    std::vector<std::string> toks;
    for (char32_t cp : text::utf8_decode(l))
      if (!text::is_space(cp)) toks.push_back(text::utf8_encode(cp));
    out.push_back(std::move(toks));
  }
  return out;
}

struct Cell {
  int i = 0;
  int j = 0;
  double x = 0;
};

/// Symmetric sparse co-occurrence counts. Both (i, j) and (j, i) are stored;
/// cells are sorted by (i, j).
struct CooccurrenceMatrix {
  std::vector<std::string> vocabulary;
  std::vector<long long> counts;
  std::vector<Cell> cells;

  std::size_t vocab_size() const noexcept { return vocabulary.size(); }

  int index_of(std::string_view token) const {
    for (std::size_t k = 0; k < vocabulary.size(); ++k)
      if (vocabulary[k] == token) return static_cast<int>(k);
    return -1;
  }

  double at(int i, int j) const {
    auto it = std::lower_bound(cells.begin(), cells.end(), std::pair{i, j},
                               [](const Cell& c, const std::pair<int, int>& key) {
                                 return std::pair{c.i, c.j} < key;
                               });
    return (it != cells.end() && it->i == i && it->j == j) ? it->x : 0.0;
  }

  double total_mass() const {
    double s = 0;
    for (const auto& c : cells) s += c.x;
    return s;
  }
};

/// Window counts weighted by 1/distance, never crossing a line. Tokens seen
/// fewer than `min_count` times are removed before windowing. Vocabulary is
/// ordered by descending count, then first appearance.
inline CooccurrenceMatrix build_cooccurrence(const TokenLines& lines, int window, int min_count = 1) {
  if (window < 1) throw RangeError("window must be >= 1");
  std::unordered_map<std::string, std::pair<long long, std::size_t>> freq;  // count, first seen
  std::size_t seen = 0, total = 0;
  for (const auto& line : lines)
    for (const auto& t : line) {
      auto [it, fresh] = freq.try_emplace(t, 0, seen);
      if (fresh) ++seen;
      ++it->second.first;
      ++total;
    }
  if (total == 0) throw InvalidArgument("empty corpus");

  std::vector<std::pair<std::string, std::pair<long long, std::size_t>>> vocab;
  for (auto& [t, cf] : freq)
    if (cf.first >= min_count) vocab.emplace_back(t, cf);
  std::sort(vocab.begin(), vocab.end(), [](const auto& a, const auto& b) {
    if (a.second.first != b.second.first) return a.second.first > b.second.first;
    return a.second.second < b.second.second;
  });

  CooccurrenceMatrix m;
  std::unordered_map<std::string, int> index;
  for (const auto& [t, cf] : vocab) {
    index.emplace(t, static_cast<int>(m.vocabulary.size()));
    m.vocabulary.push_back(t);
    m.counts.push_back(cf.first);
  }

  std::unordered_map<std::uint64_t, double> acc;
  const auto key = [](int a, int b) { return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b); };
  std::vector<int> ids;
  for (const auto& line : lines) {
    ids.clear();
    for (const auto& t : line) {
      auto it = index.find(t);
      if (it != index.end()) ids.push_back(it->second);
    }
    for (std::size_t p = 0; p < ids.size(); ++p)
      for (std::size_t d = 1; d <= static_cast<std::size_t>(window) && p + d < ids.size(); ++d) {
        const double w = 1.0 / static_cast<double>(d);
        acc[key(ids[p], ids[p + d])] += w;
        acc[key(ids[p + d], ids[p])] += w;
      }
  }
  m.cells.reserve(acc.size());
  for (const auto& [k, x] : acc)
    m.cells.push_back({static_cast<int>(k >> 32), static_cast<int>(k & 0xffffffffu), x});
  std::sort(m.cells.begin(), m.cells.end(),
            [](const Cell& a, const Cell& b) { return std::pair{a.i, a.j} < std::pair{b.i, b.j}; });
  return m;
}

struct GloveOptions {
  int dim = 128;
  int epochs = 15;
  double x_max = 100.0;
  double alpha = 0.75;
  double learning_rate = 0.05;
  std::uint64_t seed = 42;
};

/// Main and context vectors plus biases; a token's embedding is w_i + w~_i.
struct EmbeddingModel {
  std::vector<std::string> vocabulary;
  num::RowMajorMatrix W, W_ctx;
  num::Vector b, b_ctx;

  int dim() const noexcept { return static_cast<int>(W.cols()); }

  num::Vector vector(std::size_t i) const { return (W.row(i) + W_ctx.row(i)).transpose(); }

  int index_of(std::string_view token) const {
    for (std::size_t k = 0; k < vocabulary.size(); ++k)
      if (vocabulary[k] == token) return static_cast<int>(k);
    return -1;
  }

  FeatureTable to_table(std::string modality, KeyKind kind) const {
    std::vector<FeatureTable::Row> rows;
    rows.reserve(vocabulary.size());
    for (std::size_t i = 0; i < vocabulary.size(); ++i) rows.emplace_back(vocabulary[i], vector(i));
    return FeatureTable(std::move(modality), kind, dim(), std::move(rows));
  }
};

inline double glove_weight(double x, double x_max, double alpha) {
  return x < x_max ? std::pow(x / x_max, alpha) : 1.0;
}

/// J = sum over stored cells of f(X_ij) (w_i.w~_j + b_i + b~_j - log X_ij)^2.
inline double glove_loss(const EmbeddingModel& m, const CooccurrenceMatrix& X, double x_max = 100.0,
                         double alpha = 0.75) {
  double J = 0;
  for (const auto& c : X.cells) {
    const double diff = m.W.row(c.i).dot(m.W_ctx.row(c.j)) + m.b(c.i) + m.b_ctx(c.j) - std::log(c.x);
    J += glove_weight(c.x, x_max, alpha) * diff * diff;
  }
  return J;
}

struct CellGradient {
  num::Vector d_w, d_w_ctx;
  double d_b = 0, d_b_ctx = 0;
};

/// Gradient of a single cell's term of J.
inline CellGradient glove_cell_gradient(const EmbeddingModel& m, const Cell& c, double x_max = 100.0,
                                        double alpha = 0.75) {
  const double diff = m.W.row(c.i).dot(m.W_ctx.row(c.j)) + m.b(c.i) + m.b_ctx(c.j) - std::log(c.x);
  const double g = 2.0 * glove_weight(c.x, x_max, alpha) * diff;
  return {g * m.W_ctx.row(c.j).transpose(), g * m.W.row(c.i).transpose(), g, g};
}

inline EmbeddingModel init_glove(const CooccurrenceMatrix& X, int dim, std::uint64_t seed) {
  if (dim <= 0) throw RangeError("embedding dimension must be positive");
  const auto V = static_cast<Eigen::Index>(X.vocab_size());
  EmbeddingModel m;
  m.vocabulary = X.vocabulary;
  m.W.resize(V, dim);
  m.W_ctx.resize(V, dim);
  m.b.resize(V);
  m.b_ctx.resize(V);
  num::Rng rng(seed);
  const auto draw = [&] { return (num::uniform01(rng) - 0.5) / dim; };
  for (Eigen::Index i = 0; i < V; ++i)
    for (Eigen::Index k = 0; k < dim; ++k) m.W(i, k) = draw();
  for (Eigen::Index i = 0; i < V; ++i)
    for (Eigen::Index k = 0; k < dim; ++k) m.W_ctx(i, k) = draw();
  for (Eigen::Index i = 0; i < V; ++i) m.b(i) = draw();
  for (Eigen::Index i = 0; i < V; ++i) m.b_ctx(i) = draw();
  return m;
}

struct GloveResult {
  EmbeddingModel model;
  std::vector<double> loss_history;  // entry 0 = initial loss, then one per epoch
};

/// Per-cell Adagrad over shuffled cells, as in the reference GloVe trainer
/// (squared-gradient accumulators start at 1).
inline GloveResult train_glove(const CooccurrenceMatrix& X, const GloveOptions& opt) {
  if (X.cells.empty()) throw InvalidArgument("co-occurrence matrix has no cells");
  if (opt.dim <= 0) throw RangeError("embedding dimension must be positive");
  GloveResult r{init_glove(X, opt.dim, opt.seed), {}};
  auto& m = r.model;
  const auto V = static_cast<Eigen::Index>(X.vocab_size());
  num::RowMajorMatrix gsq_w = num::RowMajorMatrix::Ones(V, opt.dim), gsq_c = num::RowMajorMatrix::Ones(V, opt.dim);
  num::Vector gsq_b = num::Vector::Ones(V), gsq_bc = num::Vector::Ones(V);
  std::vector<std::size_t> order(X.cells.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  num::Rng rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);

  r.loss_history.push_back(glove_loss(m, X, opt.x_max, opt.alpha));
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    num::shuffle(order, rng);
    for (std::size_t k : order) {
      const Cell& c = X.cells[k];
      const double diff = m.W.row(c.i).dot(m.W_ctx.row(c.j)) + m.b(c.i) + m.b_ctx(c.j) - std::log(c.x);
      const double g = 2.0 * glove_weight(c.x, opt.x_max, opt.alpha) * diff;
      if (!std::isfinite(g)) throw NonFiniteError("GloVe update diverged");
      for (Eigen::Index d = 0; d < opt.dim; ++d) {
        const double gw = g * m.W_ctx(c.j, d);
        const double gc = g * m.W(c.i, d);
        m.W(c.i, d) -= opt.learning_rate * gw / std::sqrt(gsq_w(c.i, d));
        m.W_ctx(c.j, d) -= opt.learning_rate * gc / std::sqrt(gsq_c(c.j, d));
        gsq_w(c.i, d) += gw * gw;
        gsq_c(c.j, d) += gc * gc;
      }
      m.b(c.i) -= opt.learning_rate * g / std::sqrt(gsq_b(c.i));
      m.b_ctx(c.j) -= opt.learning_rate * g / std::sqrt(gsq_bc(c.j));
      gsq_b(c.i) += g * g;
      gsq_bc(c.j) += g * g;
    }
    r.loss_history.push_back(glove_loss(m, X, opt.x_max, opt.alpha));
  }
  return r;
}

struct Neighbor {
  std::string token;
  double similarity = 0;
};

/// Cosine neighbours of `token`, excluding itself; ties keep vocabulary order.
inline std::vector<Neighbor> nearest_neighbors(const FeatureTable& table, std::string_view token, std::size_t k) {
  const num::Vector& q = table.row(token);
  if (k >= table.size()) throw RangeError("k must be smaller than the vocabulary");
  const double qn = q.norm();
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.tokens()[i] == token) continue;
    const auto& v = table.row_at(i);
    const double denom = qn * v.norm();
    all.push_back({table.tokens()[i], denom > 0 ? q.dot(v) / denom : 0.0});
  }
  std::stable_sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) { return a.similarity > b.similarity; });
  all.resize(std::min(k, all.size()));
  return all;
}

inline std::vector<Neighbor> nearest_neighbors(const EmbeddingModel& model, std::string_view token, std::size_t k) {
  if (model.index_of(token) < 0) throw UnknownTokenError("token '" + std::string(token) + "' not in vocabulary");
  return nearest_neighbors(model.to_table("embedding", KeyKind::character), token, k);
}

}  // namespace disa::embed

#endif  // DISA_EMBEDDINGS_HPP
