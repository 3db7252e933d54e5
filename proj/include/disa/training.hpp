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


#ifndef DISA_TRAINING_HPP
#define DISA_TRAINING_HPP

// Three-phase actor-critic training (critic alone, policy alone, both),
// greedy evaluation and prediction.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "disa/fusion.hpp"
#include "disa/model.hpp"
#include "disa/pinyin.hpp"

namespace disa::train {

/// Independent RNG stream `stream` of a run seed (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Characters of `text` covered by the lookup with their tone rows and
/// teacher tones (phrase reading, else rank-1; 0 for characters outside the
/// lexicon). Uncovered characters are skipped.
inline model::ToneOptions encode_sentence(const fusion::FusedLookup& lookup, const pinyin::Lexicon& lex,
                                          std::string_view text) {
  model::ToneOptions out;
  for (const auto& r : pinyin::read_line(lex, text::utf8_decode(text), pinyin::UnknownPolicy::unk)) {
    if (!lookup.contains(r.ch)) continue;
    std::array<const num::Vector*, model::kActions> rows{};
    for (int a = 0; a < model::kActions; ++a) rows[static_cast<std::size_t>(a)] = &lookup.lookup(r.ch, a);
    out.chars.push_back(r.ch);
    out.rows.push_back(rows);
    out.teacher.push_back(r.syllable.base.empty() ? 0 : r.syllable.tone);
  }
  return out;
}

struct EncodedSample {
  model::ToneOptions sentence;
  int label = 0;
};

struct Sample {
  std::string text;
  int label = 0;
};

inline std::vector<EncodedSample> encode_samples(const fusion::FusedLookup& lookup, const pinyin::Lexicon& lex,
                                                 const std::vector<Sample>& samples) {
  std::vector<EncodedSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({encode_sentence(lookup, lex, s.text), s.label});
  return out;
}

inline std::vector<const num::Vector*> teacher_features(const model::ToneOptions& s) {
  std::vector<const num::Vector*> xs;
  xs.reserve(s.rows.size());
  for (std::size_t t = 0; t < s.rows.size(); ++t) xs.push_back(s.rows[t][static_cast<std::size_t>(s.teacher[t])]);
  return xs;
}

struct TrainSchedule {
  int phase1 = 5;   // critic only, teacher tones
  int phase2 = 20;  // policy only, critic frozen
  int phase3 = 5;   // co-training
  int batch_size = 50;
  std::uint64_t seed = 42;

  int total() const { return phase1 + phase2 + phase3; }
};

struct TrainConfig {
  TrainSchedule schedule;
  int hidden = 64;
  double critic_lr = 0.001;
  double policy_lr = 0.001;
  double l2 = 0.01;
  double dropout = 0.5;
  bool uniform_exploration = false;
  bool reward_baseline = false;
  double baseline_decay = 0.9;
};

struct EpochRecord {
  int epoch = 0;
  int phase = 0;
  std::size_t critic_updates = 0;
  std::size_t policy_updates = 0;
  double critic_loss = std::numeric_limits<double>::quiet_NaN();
  double mean_reward = std::numeric_limits<double>::quiet_NaN();
  double dev_accuracy = 0;
};

struct Prediction {
  int label = 0;
  num::Vector distr;
  std::vector<int> tones;
};

/// Greedy tones, no dropout. Sentences with no covered characters get the
/// classifier's zero-state distribution.
inline Prediction predict_encoded(const model::DisaModel& m, const model::ToneOptions& s, bool use_policy) {
  Prediction p;
  if (s.rows.empty()) {
    p.distr = model::prior_distribution(m);
  } else if (use_policy) {
    num::Rng unused(0);
    const auto ep = model::run_episode(m, s, 0, {model::SelectMode::greedy, false}, unused);
    p.distr = ep.distr;
    p.tones = ep.actions;
  } else {
    p.distr = model::critic_forward(m, teacher_features(s)).distr;
    p.tones = s.teacher;
  }
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < p.distr.size(); ++k)
    if (p.distr(k) > p.distr(best)) best = k;
  p.label = static_cast<int>(best);
  return p;
}

inline double accuracy(const model::DisaModel& m, const std::vector<EncodedSample>& data, bool use_policy) {
  if (data.empty()) throw InvalidArgument("cannot score an empty split");
  std::size_t correct = 0;
  for (const auto& s : data) correct += predict_encoded(m, s.sentence, use_policy).label == s.label;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

struct TrainResult {
  model::DisaModel model;  // best-dev checkpoint
  int best_epoch = 0;      // 0 = initialization (no epochs run)
  double best_dev_accuracy = 0;
  std::vector<EpochRecord> log;
  bool used_policy = false;
};

using EpochCallback = std::function<void(const EpochRecord&, const model::DisaModel&)>;

/// Trains on `train`, selects by `dev`. It never sees any test data; callers
/// that need per-epoch test scores read them through `on_epoch`.
inline TrainResult train_three_phase(model::DisaModel m, const fusion::FusedLookup& lookup,
                                     const std::vector<EncodedSample>& train_set,
                                     const std::vector<EncodedSample>& dev_set, const TrainConfig& cfg,
                                     const EpochCallback& on_epoch = {}) {
  const auto& sch = cfg.schedule;
  if (sch.batch_size < 1) throw RangeError("batch size must be >= 1");
  if (sch.phase1 < 0 || sch.phase2 < 0 || sch.phase3 < 0) throw RangeError("phase lengths must be >= 0");
  if (dev_set.empty()) throw InvalidArgument("empty dev split");
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < train_set.size(); ++i)
    if (!train_set[i].sentence.rows.empty()) usable.push_back(i);
  if (usable.empty()) throw InvalidArgument("no training sentence is covered by the '" + lookup.label() + "' lookup");

  const bool policy = lookup.has_phonetic();
  num::Rng shuffle_rng(derive_seed(sch.seed, 2)), sample_rng(derive_seed(sch.seed, 3)),
      dropout_rng(derive_seed(sch.seed, 4));
  num::Optimizer critic_opt({num::OptimizerKind::adam, cfg.critic_lr, cfg.l2});
  num::Optimizer policy_opt({num::OptimizerKind::adam, cfg.policy_lr, cfg.l2});
  const model::RolloutSettings explore{model::SelectMode::sample, cfg.uniform_exploration};
  std::optional<double> baseline;

  TrainResult result{m, 0, -1.0, {}, policy};
  for (int epoch = 1; epoch <= sch.total(); ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.phase = !policy || epoch <= sch.phase1 ? 1 : (epoch <= sch.phase1 + sch.phase2 ? 2 : 3);
    num::shuffle(usable, shuffle_rng);
    double loss_sum = 0, reward_sum = 0;
    std::size_t episodes_seen = 0;
    for (std::size_t start = 0; start < usable.size(); start += static_cast<std::size_t>(sch.batch_size)) {
      const std::size_t end = std::min(usable.size(), start + static_cast<std::size_t>(sch.batch_size));
      std::vector<model::LabeledSequence> critic_batch;
      if (rec.phase == 1) {
        for (std::size_t k = start; k < end; ++k) {
          const auto& s = train_set[usable[k]];
          critic_batch.push_back({teacher_features(s.sentence), s.label});
        }
      } else {
        std::vector<model::Episode> eps;
        for (std::size_t k = start; k < end; ++k) {
          const auto& s = train_set[usable[k]];
          eps.push_back(model::run_episode(m, s.sentence, s.label, explore, sample_rng));
        }
        double batch_reward = 0;
        for (const auto& e : eps) batch_reward += e.reward;
        batch_reward /= static_cast<double>(eps.size());
        reward_sum += batch_reward * static_cast<double>(eps.size());
        episodes_seen += eps.size();
        double b = 0;
        if (cfg.reward_baseline) {
          if (!baseline) baseline = batch_reward;
          b = *baseline;
          baseline = cfg.baseline_decay * *baseline + (1.0 - cfg.baseline_decay) * batch_reward;
        }
        model::policy_gradient_update(m, eps, policy_opt, b);
        ++rec.policy_updates;
        if (rec.phase == 3)
          for (auto& e : eps) critic_batch.push_back({std::move(e.features), e.label});
      }
      if (!critic_batch.empty()) {
        loss_sum += model::critic_update(m, critic_batch, critic_opt, cfg.dropout > 0 ? &dropout_rng : nullptr,
                                         cfg.dropout) *
                    static_cast<double>(critic_batch.size());
        ++rec.critic_updates;
      }
    }
    if (rec.critic_updates) rec.critic_loss = loss_sum / static_cast<double>(usable.size());
    if (episodes_seen) rec.mean_reward = reward_sum / static_cast<double>(episodes_seen);
    rec.dev_accuracy = accuracy(m, dev_set, policy);
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec, m);
    if (rec.dev_accuracy > result.best_dev_accuracy) {
      result.best_dev_accuracy = rec.dev_accuracy;
      result.best_epoch = epoch;
      result.model = m;
    }
  }
  if (result.best_epoch == 0) result.best_dev_accuracy = accuracy(m, dev_set, policy);
  return result;
}

/// Label, distribution and the chosen tone-annotated pinyin of a raw text.
struct TextPrediction {
  int label = 0;
  num::Vector distr;
  std::vector<std::string> pinyin;
};

inline TextPrediction predict(const model::DisaModel& m, const fusion::FusedLookup& lookup,
                              const pinyin::Lexicon& lex, std::string_view text) {
  const auto s = encode_sentence(lookup, lex, text);
  if (s.rows.empty()) throw InvalidArgument("no covered characters in input text");
  const auto p = predict_encoded(m, s, lookup.has_phonetic());
  TextPrediction out{p.label, p.distr, {}};
  for (std::size_t t = 0; t < s.chars.size(); ++t) {
    if (!lex.contains(s.chars[t])) {
      out.pinyin.push_back(std::string(pinyin::kUnknownToken));
      continue;
    }
    out.pinyin.push_back(pinyin::Syllable{lex.primary(s.chars[t]).base, p.tones[t]}.str());
  }
  return out;
}

}  // namespace disa::train

#endif  // DISA_TRAINING_HPP
