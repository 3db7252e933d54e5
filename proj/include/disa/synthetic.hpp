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


#ifndef DISA_SYNTHETIC_HPP
#define DISA_SYNTHETIC_HPP

// Seeded tone-disambiguation benchmark. Half of the sentences carry their
// sentiment in a polar character with a unique toneless syllable. The other
// half carry it in one member of a homophone pair whose two members share a
// base and differ only in tone, followed by a heteronym whose reading (tone 3
// or 4) agrees with the sentiment. Without tones the second kind is a coin
// flip, which caps toneless accuracy at 1 - p_amb / 2. Sentiment-bearing
// characters lean towards tones 1-2 (positive) or 3-4 (negative), and the
// unlabeled corpus pairs each of them with a particle specific to its tone.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "disa/embeddings.hpp"
#include "disa/eval.hpp"
#include "disa/phonetics.hpp"
#include "disa/pinyin.hpp"
#include "disa/training.hpp"

namespace disa::synth {

struct SyntheticOptions {
  double ambiguous_fraction = 0.5;
  int polar_chars = 0;  // 0 = clamp(0.4 * size, 8, 800)
  int cue_pairs = 0;    // 0 = clamp(0.2 * size, 4, 400)
  int fillers = 30;
  int heteronyms = 4;
  int min_fillers = 0;
  int max_fillers = 2;
  int markers = 8;           // polarity context characters per class
  double tone_polarity = 0.9;  // P(tone of a sentiment-bearing character lies in its class's tone group)
  int particle_mentions = 2;   // tone particles per corpus mention line
  int corpus_mentions = 8;   // unlabeled corpus lines per sentiment-bearing character
  int filler_lines = 400;    // corpus lines of fillers and heteronyms only
  std::optional<std::uint64_t> vocab_seed;  // share a vocabulary across domains
};

struct SyntheticTask {
  pinyin::Lexicon lexicon;
  std::vector<std::string> corpus;
  eval::LabeledDataset dataset;
  std::vector<bool> ambiguous;             // per sample
  std::vector<std::vector<int>> tones;     // generative tone of each character, per sample
  std::vector<std::string> bases;          // every base in the lexicon, first-use order
  double designed_cap = 0;                 // expected toneless Bayes accuracy

  /// Exact Bayes accuracy of the best toneless classifier on the given
  /// samples: sentiment-unique bases are always decidable, homophone-pair
  /// sentences are 50/50 given their toneless syllables.
  double toneless_bayes_accuracy(const std::vector<std::size_t>& idx) const {
    if (idx.empty()) throw InvalidArgument("no samples");
    double s = 0;
    for (std::size_t i : idx) s += ambiguous.at(i) ? 0.5 : 1.0;
    return s / static_cast<double>(idx.size());
  }
};

/// Distinct pseudo-syllables (onset + nucleus + coda), shuffled by `rng`.
inline std::vector<std::string> pseudo_bases(num::Rng& rng) {
  static const char* onsets[] = {"b", "p", "m", "f", "d", "t", "n", "l", "g", "k", "h", "j",
                                 "q", "x", "zh", "ch", "sh", "r", "z", "c", "s", "y", "w"};
  static const char* nuclei[] = {"a", "o", "e", "i", "u", "v", "ai", "ei", "ao", "ou", "ia", "ie", "ua", "uo"};
  static const char* codas[] = {"", "n", "ng", "r", "m"};
  std::vector<std::string> out;
  for (const char* o : onsets)
    for (const char* n : nuclei)
      for (const char* c : codas) out.push_back(std::string(o) + n + c);
  num::shuffle(out, rng);
  return out;
}

inline SyntheticTask make_synthetic_task(std::uint64_t seed, std::size_t size, const SyntheticOptions& opt = {}) {
  if (size < 200) throw InvalidArgument("synthetic task needs size >= 200");
  if (opt.ambiguous_fraction < 0 || opt.ambiguous_fraction > 1) throw RangeError("ambiguous_fraction outside [0,1]");
  if (opt.min_fillers < 0 || opt.max_fillers < opt.min_fillers) throw RangeError("bad filler range");
  const auto clamp_count = [&](int given, double share, int lo, int hi) {
    if (given > 0) return given;
    return std::clamp(static_cast<int>(share * static_cast<double>(size)), lo, hi);
  };
  const int n_polar = clamp_count(opt.polar_chars, 0.4, 8, 800) / 2 * 2;
  const int n_pairs = clamp_count(opt.cue_pairs, 0.2, 4, 400);

  num::Rng vocab_rng(opt.vocab_seed.value_or(seed));
  const auto bases = pseudo_bases(vocab_rng);
  if (opt.markers < 1) throw RangeError("need at least one marker per class");
  if (opt.tone_polarity < 0 || opt.tone_polarity > 1) throw RangeError("tone_polarity outside [0,1]");
  const std::size_t needed = 2 * static_cast<std::size_t>(opt.markers) + 4 + static_cast<std::size_t>(opt.fillers + opt.heteronyms + n_pairs + n_polar);
  if (needed > bases.size()) throw RangeError("synthetic vocabulary needs more distinct syllables than available");

  SyntheticTask task;
  std::size_t next_base = 0;
  char32_t next_char = 0x4E00;
  const auto random_tone = [&] { return 1 + static_cast<int>(num::uniform_index(vocab_rng, 4)); };
  const auto new_char = [&](const std::string& base, int tone) {
    const char32_t ch = next_char++;
    task.lexicon.add(ch, {base, tone}, 1);
    return ch;
  };
  // Tones 1-2 for class 1, 3-4 for class 0, with probability tone_polarity.
  const auto polar_tone_for = [&](int y) {
    const bool own = num::uniform01(vocab_rng) < opt.tone_polarity;
    const int group = own ? y : 1 - y;
    return (group == 1 ? 1 : 3) + static_cast<int>(num::uniform_index(vocab_rng, 2));
  };
  const auto take_base = [&] {
    task.bases.push_back(bases[next_base]);
    return bases[next_base++];
  };

  std::array<std::vector<char32_t>, 2> marker;
  for (int y = 0; y < 2; ++y)
    for (int k = 0; k < opt.markers; ++k) marker[static_cast<std::size_t>(y)].push_back(new_char(take_base(), random_tone()));
  std::array<char32_t, 5> particle{};
  for (int t = 1; t <= 4; ++t) particle[static_cast<std::size_t>(t)] = new_char(take_base(), random_tone());
  std::vector<char32_t> fillers;
  // Fillers play the part of neutral-tone function words.
  for (int k = 0; k < opt.fillers; ++k) fillers.push_back(new_char(take_base(), 0));
  std::vector<char32_t> heteronyms;
  for (int k = 0; k < opt.heteronyms; ++k) {
    const auto b = take_base();
    const char32_t ch = new_char(b, 3);
    task.lexicon.add(ch, {b, 4}, 2);
    heteronyms.push_back(ch);
  }
  // cue[k][y] is the member of pair k with sentiment y.
  std::vector<std::array<char32_t, 2>> cues;
  std::vector<std::array<int, 2>> cue_tones;
  for (int k = 0; k < n_pairs; ++k) {
    const auto b = take_base();
    const int t0 = polar_tone_for(0);
    int t1 = polar_tone_for(1);
    while (t1 == t0) t1 = polar_tone_for(1);
    cues.push_back({new_char(b, t0), new_char(b, t1)});
    cue_tones.push_back({t0, t1});
  }
  std::array<std::vector<char32_t>, 2> polar;
  std::map<char32_t, int> polar_tone;
  for (int k = 0; k < n_polar; ++k) {
    const int t = polar_tone_for(k % 2);
    const char32_t ch = new_char(take_base(), t);
    polar[static_cast<std::size_t>(k % 2)].push_back(ch);
    polar_tone[ch] = t;
  }
  task.lexicon.finalize();
  const auto tone_of = [&](char32_t ch) { return task.lexicon.primary(ch).tone; };

  // Unlabeled corpus: sentiment-bearing characters co-occur with markers of
  // both polarities (three times as often with their own), with
  // same-polarity characters and with the particle of their tone.
  std::array<std::vector<char32_t>, 2> bearing = polar;
  for (const auto& c : cues)
    for (int y = 0; y < 2; ++y) bearing[static_cast<std::size_t>(y)].push_back(c[static_cast<std::size_t>(y)]);
  std::vector<std::pair<char32_t, int>> mentions;
  for (int y = 0; y < 2; ++y)
    for (char32_t ch : bearing[static_cast<std::size_t>(y)]) mentions.emplace_back(ch, y);
  const auto pick = [&](const std::vector<char32_t>& v) { return v[num::uniform_index(vocab_rng, v.size())]; };
  for (const auto& [ch, y] : mentions)
    for (int r = 0; r < opt.corpus_mentions; ++r) {
      std::u32string line{ch};
      const auto& same = bearing[static_cast<std::size_t>(y)];
      for (int k = 0; k < 3; ++k) line.push_back(pick(marker[static_cast<std::size_t>(y)]));
      line.push_back(pick(marker[static_cast<std::size_t>(1 - y)]));
      line.push_back(pick(same));
      line.push_back(pick(fillers));
      for (int k = 0; k < opt.particle_mentions; ++k) line.push_back(particle[static_cast<std::size_t>(tone_of(ch))]);
      std::vector<char32_t> v(line.begin(), line.end());
      num::shuffle(v, vocab_rng);
      task.corpus.push_back(text::utf8_encode(std::u32string(v.begin(), v.end())));
    }
  for (int r = 0; r < opt.filler_lines; ++r) {
    std::u32string line;
    const int nf = 3 + static_cast<int>(num::uniform_index(vocab_rng, 4));
    for (int f = 0; f < nf; ++f) line.push_back(pick(fillers));
    if (!heteronyms.empty() && r % 2 == 0) line.push_back(pick(heteronyms));
    task.corpus.push_back(text::utf8_encode(line));
  }
  num::shuffle(task.corpus, vocab_rng);

  // Labeled samples.
  num::Rng rng(train::derive_seed(seed, 7));
  const auto n_amb = static_cast<std::size_t>(std::llround(opt.ambiguous_fraction * static_cast<double>(size)));
  std::vector<bool> amb(size, false);
  std::fill(amb.begin(), amb.begin() + static_cast<std::ptrdiff_t>(n_amb), true);
  num::shuffle(amb, rng);
  task.dataset.name = "synthetic";
  task.dataset.classes = 2;
  for (std::size_t i = 0; i < size; ++i) {
    const int y = static_cast<int>(num::uniform_index(rng, 2));
    std::vector<char32_t> chars;
    std::vector<int> tones;
    const int nf = opt.min_fillers + static_cast<int>(num::uniform_index(rng, static_cast<std::size_t>(
                                                                                  opt.max_fillers - opt.min_fillers + 1)));
    for (int f = 0; f < nf; ++f) {
      const char32_t ch = fillers[num::uniform_index(rng, fillers.size())];
      chars.push_back(ch);
      tones.push_back(tone_of(ch));
    }
    const auto pos = static_cast<std::ptrdiff_t>(num::uniform_index(rng, chars.size() + 1));
    if (amb[i]) {
      const std::size_t k = num::uniform_index(rng, cues.size());
      const char32_t cue = cues[k][static_cast<std::size_t>(y)];
      const char32_t het = heteronyms[num::uniform_index(rng, heteronyms.size())];
      chars.insert(chars.begin() + pos, {cue, het});
      tones.insert(tones.begin() + pos, {cue_tones[k][static_cast<std::size_t>(y)], y == 1 ? 3 : 4});
    } else {
      const auto& pool = polar[static_cast<std::size_t>(y)];
      const char32_t ch = pool[num::uniform_index(rng, pool.size())];
      chars.insert(chars.begin() + pos, ch);
      tones.insert(tones.begin() + pos, polar_tone[ch]);
    }
    task.dataset.samples.push_back({text::utf8_encode(std::u32string(chars.begin(), chars.end())), y});
    task.ambiguous.push_back(amb[i]);
    task.tones.push_back(std::move(tones));
  }
  task.designed_cap = 1.0 - 0.5 * opt.ambiguous_fraction;
  return task;
}

struct FeatureOptions {
  int dim = 32;  // GloVe width for T, PO and PW
  int glove_epochs = 50;
  double glove_lr = 0.05;
  double glove_x_max = 10;
  int window = 5;
  phon::SyntheticClipOptions clips{40, 0.3, 2.0, 0.05};
  std::uint64_t seed = 42;
};

/// Desk-scale training settings for the synthetic benchmark (smaller critic,
/// larger steps); everything else keeps the library defaults.
inline train::TrainConfig train_config() {
  train::TrainConfig cfg;
  cfg.hidden = 16;
  cfg.critic_lr = 0.01;
  cfg.policy_lr = 0.01;
  return cfg;
}

/// T, Ex0, Ex04, PO and PW tables for a synthetic task.
inline eval::FeatureSet build_features(const SyntheticTask& task, const FeatureOptions& opt = {}) {
  eval::FeatureSet fs;
  embed::GloveOptions g;
  g.dim = opt.dim;
  g.epochs = opt.glove_epochs;
  g.learning_rate = opt.glove_lr;
  g.x_max = opt.glove_x_max;
  g.seed = train::derive_seed(opt.seed, 11);
  const auto X = embed::build_cooccurrence(embed::tokenize_chars(task.corpus), opt.window);
  fs.T = embed::train_glove(X, g).model.to_table("T", KeyKind::character);
  const auto ex = phon::build_ex_tables(phon::synthetic_clips(task.bases, train::derive_seed(opt.seed, 12), opt.clips));
  fs.Ex04 = ex.ex04;
  fs.Ex0 = ex.ex0;
  g.seed = train::derive_seed(opt.seed, 13);
  fs.PO = phon::build_pinyin_embeddings(task.lexicon, task.corpus, phon::PinyinEmbeddingMode::po, g, opt.window);
  g.seed = train::derive_seed(opt.seed, 14);
  fs.PW = phon::build_pinyin_embeddings(task.lexicon, task.corpus, phon::PinyinEmbeddingMode::pw, g, opt.window);
  return fs;
}

}  // namespace disa::synth

#endif  // DISA_SYNTHETIC_HPP
