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


#ifndef DISA_PHONETICS_HPP
#define DISA_PHONETICS_HPP

// Phonetic feature tables: acoustic (Ex0, Ex04) from per-clip descriptor
// matrices, corpus-trained pinyin embeddings (PO, PW), and concatenations.

#include <algorithm>
#include <cmath>
#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/QR>

#include "disa/embeddings.hpp"
#include "disa/feature_table.hpp"
#include "disa/numerics/svd.hpp"
#include "disa/pinyin.hpp"

namespace disa::phon {

inline constexpr int kDescriptorCount = 39;

/// Frame-by-descriptor matrix of one recorded toned syllable.
struct AcousticClipMatrix {
  pinyin::Syllable syllable;
  num::Matrix frames;

  AcousticClipMatrix() = default;
  AcousticClipMatrix(pinyin::Syllable s, num::Matrix f) : syllable(std::move(s)), frames(std::move(f)) { check(); }

  void check() const {
    if (syllable.tone < 1 || syllable.tone > 4)
      throw RangeError("clip " + syllable.str() + ": recorded tones must be 1..4");
    if (frames.cols() != kDescriptorCount)
      throw ShapeError("clip " + syllable.str() + " has " + std::to_string(frames.cols()) + " columns, expected 39");
    if (frames.rows() < 1) throw ShapeError("clip " + syllable.str() + " has no frames");
    num::require_finite(num::view(frames), "clip frames");
  }
};

/// Singular values of the clip, descending, zero-padded to 39.
inline num::Vector reduce_clip(const AcousticClipMatrix& clip) {
  clip.check();
  num::Vector out = num::Vector::Zero(kDescriptorCount);
  const num::Vector s = num::singular_values(clip.frames);
  out.head(s.size()) = s;
  return out;
}

struct ExTables {
  PhoneticTable ex04;
  PhoneticTable ex0;
};

/// Ex04 rows for tones 1-4 are the reduced clips; tone 0 is their mean; Ex0
/// is the mean of all five Ex04 rows of a base. Bases keep first-seen order.
inline ExTables build_ex_tables(const std::vector<AcousticClipMatrix>& clips) {
  if (clips.empty()) throw InvalidArgument("no acoustic clips");
  std::vector<std::string> bases;
  std::map<std::string, std::array<std::optional<num::Vector>, 5>> by_base;
  for (const auto& c : clips) {
    auto [it, fresh] = by_base.try_emplace(c.syllable.base);
    if (fresh) bases.push_back(c.syllable.base);
    auto& slot = it->second[static_cast<std::size_t>(c.syllable.tone)];
    if (slot) throw InvalidArgument("duplicate clip for " + c.syllable.str());
    slot = reduce_clip(c);
  }
  std::vector<std::string> gaps;
  for (const auto& b : bases)
    for (int t = 1; t <= 4; ++t)
      if (!by_base[b][static_cast<std::size_t>(t)]) gaps.push_back(b + std::to_string(t));
  if (!gaps.empty()) throw InvalidArgument("missing clips for: " + text::join(gaps, ", "));

  std::vector<FeatureTable::Row> ex04_rows, ex0_rows;
  for (const auto& b : bases) {
    auto& r = by_base[b];
    num::Vector neutral = (*r[1] + *r[2] + *r[3] + *r[4]) / 4.0;
    num::Vector toneless = (neutral + *r[1] + *r[2] + *r[3] + *r[4]) / 5.0;
    ex04_rows.emplace_back(b + "0", std::move(neutral));
    for (int t = 1; t <= 4; ++t) ex04_rows.emplace_back(b + std::to_string(t), *r[static_cast<std::size_t>(t)]);
    ex0_rows.emplace_back(b, std::move(toneless));
  }
  return {PhoneticTable("Ex04", KeyKind::toned, kDescriptorCount, std::move(ex04_rows)),
          PhoneticTable("Ex0", KeyKind::base, kDescriptorCount, std::move(ex0_rows))};
}

enum class PinyinEmbeddingMode { po, pw };

/// Converts the corpus (toneless for PO, toned for PW) and trains GloVe on
/// the pinyin tokens. PW gets a zero row for every toned form of a seen base
/// that never occurs in the corpus, so each base has all five tone rows.
inline PhoneticTable build_pinyin_embeddings(const pinyin::Lexicon& lex, const std::vector<std::string>& corpus,
                                             PinyinEmbeddingMode mode, const embed::GloveOptions& opt,
                                             int window = 5, int min_count = 1) {
  const bool toned = mode == PinyinEmbeddingMode::pw;
  const auto lines = pinyin::convert_corpus(lex, corpus, toned ? pinyin::ConversionMode::toned
                                                               : pinyin::ConversionMode::toneless);
  auto tokens = embed::tokenize_words(lines);
  // Unknown-character placeholders carry no pinyin and are not embedded.
  for (auto& l : tokens) std::erase(l, std::string(pinyin::kUnknownToken));
  std::size_t n = 0;
  for (const auto& l : tokens) n += l.size();
  if (n == 0) throw InvalidArgument("converted corpus is empty");
  const auto X = embed::build_cooccurrence(tokens, window, min_count);
  const auto model = embed::train_glove(X, opt).model;
  if (!toned) return model.to_table("PO", KeyKind::base);

  std::vector<std::string> bases;
  std::map<std::string, std::array<std::optional<num::Vector>, 5>> rows;
  for (std::size_t i = 0; i < model.vocabulary.size(); ++i) {
    const auto s = pinyin::parse_syllable(model.vocabulary[i]);
    auto [it, fresh] = rows.try_emplace(s.base);
    if (fresh) bases.push_back(s.base);
    it->second[static_cast<std::size_t>(s.tone)] = model.vector(i);
  }
  std::vector<FeatureTable::Row> out;
  for (const auto& b : bases)
    for (int t = 0; t < pinyin::kToneCount; ++t) {
      const auto& v = rows[b][static_cast<std::size_t>(t)];
      out.emplace_back(b + std::to_string(t), v ? *v : num::Vector::Zero(opt.dim));
    }
  return PhoneticTable("PW", KeyKind::toned, opt.dim, std::move(out));
}

/// Row-wise concatenation over the keys all parts share. If any part is
/// toned the result is keyed by toned form and base-keyed parts contribute
/// their base row. Keys dropped from the first toned (or first) part are
/// appended to `missing`.
inline PhoneticTable concat_tables(std::string label, const std::vector<const PhoneticTable*>& parts,
                                   std::vector<std::string>* missing = nullptr) {
  if (parts.empty()) throw InvalidArgument("nothing to concatenate");
  const PhoneticTable* lead = parts.front();
  for (const auto* p : parts)
    if (p->key_kind() == KeyKind::toned) {
      lead = p;
      break;
    }
  int dim = 0;
  for (const auto* p : parts) dim += p->dim();
  std::vector<FeatureTable::Row> rows;
  for (const auto& key : lead->tokens()) {
    std::vector<const num::Vector*> found;
    for (const auto* p : parts) {
      const num::Vector* v = nullptr;
      if (p->key_kind() == lead->key_kind()) {
        v = p->find(key);
      } else if (lead->key_kind() == KeyKind::toned && p->key_kind() == KeyKind::base) {
        v = p->find(pinyin::strip_tone(key));
      } else {
        throw InvalidArgument("cannot combine " + std::string(to_string(p->key_kind())) + "-keyed '" + p->modality() +
                              "' with " + to_string(lead->key_kind()) + "-keyed '" + lead->modality() + "'");
      }
      if (!v) break;
      found.push_back(v);
    }
    if (found.size() != parts.size()) {
      if (missing) missing->push_back(key);
      continue;
    }
    num::Vector row(dim);
    Eigen::Index off = 0;
    for (const auto* v : found) {
      row.segment(off, v->size()) = *v;
      off += v->size();
    }
    rows.emplace_back(key, std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("tables '" + label + "' share no keys");
  return PhoneticTable(std::move(label), lead->key_kind(), dim, std::move(rows));
}

/// P = Ex04 concatenated with PW over their shared toned keys.
inline PhoneticTable build_p_table(const PhoneticTable& ex04, const PhoneticTable& pw,
                                   std::vector<std::string>* missing = nullptr) {
  if (ex04.key_kind() != KeyKind::toned || pw.key_kind() != KeyKind::toned)
    throw InvalidArgument("P needs toned Ex04 and PW tables");
  // Report keys present in either source but not both.
  std::vector<std::string> local;
  auto table = concat_tables("P", {&ex04, &pw}, &local);
  for (const auto& k : pw.tokens())
    if (!ex04.contains(k)) local.push_back(k);
  if (missing) missing->insert(missing->end(), local.begin(), local.end());
  return table;
}

// Clip files: `<base><tone>.csv`, one frame per line, 39 comma-separated reals.

inline AcousticClipMatrix parse_clip(const std::string& name, const std::vector<std::string>& lines) {
  std::string stem = std::filesystem::path(name).stem().string();
  const auto syl = pinyin::parse_syllable(stem);
  std::vector<std::vector<double>> frames;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (text::trim(lines[n]).empty()) continue;
    const auto fields = text::split(lines[n], ',');
    if (fields.size() != static_cast<std::size_t>(kDescriptorCount))
      throw ParseError(name + ": frame has " + std::to_string(fields.size()) + " values, expected 39", 0, n + 1);
    std::vector<double> f;
    for (const auto& x : fields) {
      try {
        f.push_back(text::parse_real(x));
      } catch (const ParseError& e) {
        throw ParseError(name + ": " + e.what(), 0, n + 1);
      }
    }
    frames.push_back(std::move(f));
  }
  num::Matrix m(static_cast<Eigen::Index>(frames.size()), kDescriptorCount);
  for (std::size_t r = 0; r < frames.size(); ++r)
    for (int c = 0; c < kDescriptorCount; ++c) m(static_cast<Eigen::Index>(r), c) = frames[r][static_cast<std::size_t>(c)];
  return AcousticClipMatrix(syl, std::move(m));
}

inline std::string serialize_clip(const AcousticClipMatrix& clip) {
  std::string out;
  for (Eigen::Index r = 0; r < clip.frames.rows(); ++r) {
    for (Eigen::Index c = 0; c < clip.frames.cols(); ++c) {
      if (c) out += ',';
      out += text::format_real(clip.frames(r, c));
    }
    out += '\n';
  }
  return out;
}

/// Loads every `*.csv` in a directory, sorted by file name.
inline std::vector<AcousticClipMatrix> load_clip_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("not a directory: '" + dir + "'");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<AcousticClipMatrix> clips;
  for (const auto& f : files) clips.push_back(parse_clip(f.filename().string(), text::read_lines(f.string())));
  return clips;
}

inline void save_clip_dir(const std::string& dir, const std::vector<AcousticClipMatrix>& clips) {
  std::filesystem::create_directories(dir);
  for (const auto& c : clips) text::write_text(dir + "/" + c.syllable.str() + ".csv", serialize_clip(c));
}

struct SyntheticClipOptions {
  int frames = 40;
  double base_scale = 1.0;  // size of the per-base staircase
  double tone_scale = 1.0;  // height of the per-tone ramp
  double noise = 0.05;      // relative per-clip jitter on the spectrum
};

/// Clips whose singular-value spectrum is a per-base staircase (suffix sums
/// of random increments) plus a per-tone ramp max(0, 1 - k / K_t), placed
/// between random orthonormal frames. Both parts are non-increasing, so the
/// spectrum comes back from the SVD in the same order.
inline std::vector<AcousticClipMatrix> synthetic_clips(const std::vector<std::string>& bases, std::uint64_t seed,
                                                       const SyntheticClipOptions& opt = {}) {
  if (opt.frames < kDescriptorCount) throw RangeError("synthetic clips need at least 39 frames");
  num::Rng rng(seed);
  const auto orthonormal = [&](int rows, int cols) {
    num::Matrix g(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) g(r, c) = num::standard_normal(rng);
    Eigen::HouseholderQR<num::Matrix> qr(g);
    return num::Matrix(qr.householderQ() * num::Matrix::Identity(rows, cols));
  };
  std::array<double, 4> ramp_length{4, 8, 16, 32};
  num::shuffle(ramp_length, rng);
  std::vector<AcousticClipMatrix> clips;
  for (const auto& b : bases) {
    num::Vector base(kDescriptorCount);
    double acc = 0;
    for (int k = kDescriptorCount - 1; k >= 0; --k) {
      acc += 0.05 * opt.base_scale * num::uniform01(rng);
      base(k) = acc;
    }
    for (int t = 1; t <= 4; ++t) {
      num::Vector s(kDescriptorCount);
      for (int k = 0; k < kDescriptorCount; ++k) {
        const double ramp = std::max(0.0, 1.0 - k / ramp_length[static_cast<std::size_t>(t - 1)]);
        s(k) = std::abs((base(k) + opt.tone_scale * ramp) * (1.0 + opt.noise * num::standard_normal(rng)));
      }
      const num::Matrix U = orthonormal(opt.frames, kDescriptorCount);
      const num::Matrix V = orthonormal(kDescriptorCount, kDescriptorCount);
      clips.emplace_back(pinyin::Syllable{b, t}, U * s.asDiagonal() * V.transpose());
    }
  }
  return clips;
}

}  // namespace disa::phon

#endif  // DISA_PHONETICS_HPP
