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


#ifndef DISA_FUSION_HPP
#define DISA_FUSION_HPP

// Per-character fused lookup: T ⊕ P(base + tone) ⊕ V, with absent
// modalities skipped.

#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "disa/feature_table.hpp"
#include "disa/pinyin.hpp"

namespace disa::fusion {

/// The tables a lookup is assembled from; null members are not included.
struct FusionInputs {
  const FeatureTable* textual = nullptr;
  const PhoneticTable* phonetic = nullptr;
  const FeatureTable* visual = nullptr;
};

class FusedLookup {
 public:
  FusedLookup() = default;

  int dim() const noexcept { return dim_; }
  bool has_phonetic() const noexcept { return has_p_; }
  /// 5 when a phonetic segment is present, 1 otherwise.
  int tone_rows() const noexcept { return has_p_ ? pinyin::kToneCount : 1; }
  std::size_t size() const noexcept { return chars_.size(); }
  const std::vector<char32_t>& characters() const noexcept { return chars_; }
  const std::string& label() const noexcept { return label_; }

  /// Segment offsets and widths, in the order T, P, V.
  struct Segment {
    std::string modality;
    int offset = 0;
    int width = 0;
  };
  const std::vector<Segment>& segments() const noexcept { return segments_; }

  bool contains(char32_t ch) const { return index_.count(ch) != 0; }

  const num::Vector& lookup(char32_t ch, int tone) const {
    if (tone < 0 || tone >= pinyin::kToneCount) throw RangeError("tone must be in 0..4");
    auto it = index_.find(ch);
    if (it == index_.end()) throw UnknownTokenError("character not covered by fused lookup: " + text::utf8_encode(ch));
    return rows_[it->second * static_cast<std::size_t>(tone_rows()) + (has_p_ ? static_cast<std::size_t>(tone) : 0)];
  }

  const num::Vector* find(char32_t ch, int tone) const {
    if (tone < 0 || tone >= pinyin::kToneCount) return nullptr;
    auto it = index_.find(ch);
    if (it == index_.end()) return nullptr;
    return &rows_[it->second * static_cast<std::size_t>(tone_rows()) + (has_p_ ? static_cast<std::size_t>(tone) : 0)];
  }

  friend FusedLookup build_fused(const FusionInputs& in, const pinyin::Lexicon& lex,
                                 std::vector<std::string>* missing);

 private:
  std::string label_;
  int dim_ = 0;
  bool has_p_ = false;
  std::vector<Segment> segments_;
  std::vector<char32_t> chars_;
  std::unordered_map<char32_t, std::size_t> index_;
  std::vector<num::Vector> rows_;
};

/// Characters are kept iff present in every selected per-character table and,
/// when P is selected, their rank-1 base has all five tone rows (toned P) or
/// a row (base-keyed P). Dropped characters are appended to `missing`.
inline FusedLookup build_fused(const FusionInputs& in, const pinyin::Lexicon& lex,
                               std::vector<std::string>* missing = nullptr) {
  if (!in.textual && !in.phonetic && !in.visual) throw InvalidArgument("fusion needs at least one table");
  if (in.phonetic && in.phonetic->key_kind() == KeyKind::character)
    throw InvalidArgument("table '" + in.phonetic->modality() + "' is not keyed by pinyin");
  FusedLookup f;
  f.has_p_ = in.phonetic != nullptr;
  std::vector<std::string> names;
  for (const FeatureTable* t : {in.textual, static_cast<const FeatureTable*>(in.phonetic), in.visual}) {
    if (!t) continue;
    f.segments_.push_back({t->modality(), f.dim_, t->dim()});
    f.dim_ += t->dim();
    names.push_back(t->modality());
  }
  f.label_ = text::join(names, "+");

  std::vector<char32_t> candidates;
  const FeatureTable* per_char = in.textual ? in.textual : in.visual;
  if (per_char) {
    for (const auto& tok : per_char->tokens()) {
      const auto cps = text::utf8_decode(tok);
      if (cps.size() == 1) candidates.push_back(cps[0]);
    }
  } else {
    candidates = lex.characters();
  }

  std::vector<const num::Vector*> p_rows(pinyin::kToneCount);
  for (char32_t ch : candidates) {
    const std::string key = text::utf8_encode(ch);
    const num::Vector* t = in.textual ? in.textual->find(key) : nullptr;
    const num::Vector* v = in.visual ? in.visual->find(key) : nullptr;
    bool ok = (!in.textual || t) && (!in.visual || v);
    if (ok && in.phonetic) {
      if (!lex.contains(ch)) {
        ok = false;
      } else {
        const std::string& base = lex.primary(ch).base;
        for (int tone = 0; tone < pinyin::kToneCount && ok; ++tone) {
          p_rows[static_cast<std::size_t>(tone)] = phonetic_row(*in.phonetic, {base, tone});
          ok = p_rows[static_cast<std::size_t>(tone)] != nullptr;
        }
      }
    }
    if (!ok) {
      if (missing) missing->push_back(key);
      continue;
    }
    f.index_.emplace(ch, f.chars_.size());
    f.chars_.push_back(ch);
    for (int tone = 0; tone < f.tone_rows(); ++tone) {
      num::Vector row(f.dim_);
      Eigen::Index off = 0;
      const auto put = [&](const num::Vector* src) {
        row.segment(off, src->size()) = *src;
        off += src->size();
      };
      if (t) put(t);
      if (in.phonetic) put(p_rows[static_cast<std::size_t>(tone)]);
      if (v) put(v);
      f.rows_.push_back(std::move(row));
    }
  }
  if (f.chars_.empty()) {
    std::string sample;
    if (missing && !missing->empty())
      sample = ": " + text::join(std::vector<std::string>(missing->begin(),
                                                          missing->begin() + std::min<std::ptrdiff_t>(20, missing->size())),
                                 " ");
    throw InvalidArgument("fused lookup '" + f.label_ + "' covers no characters" + sample);
  }
  return f;
}

enum class RandomDistribution { clipped_normal, uniform };

/// Same keys and dimension as `tmpl`; entries are 0.5 * N(0,1) clipped to
/// [-1, 1], or uniform on [-1, 1).
inline FeatureTable random_table(const FeatureTable& tmpl, std::uint64_t seed,
                                 RandomDistribution dist = RandomDistribution::clipped_normal) {
  if (tmpl.empty()) throw InvalidArgument("random_table needs a non-empty template");
  num::Rng rng(seed);
  std::vector<FeatureTable::Row> rows;
  rows.reserve(tmpl.size());
  for (const auto& tok : tmpl.tokens()) {
    num::Vector v(tmpl.dim());
    for (int k = 0; k < tmpl.dim(); ++k)
      v(k) = dist == RandomDistribution::uniform ? 2.0 * num::uniform01(rng) - 1.0
                                                 : std::clamp(0.5 * num::standard_normal(rng), -1.0, 1.0);
    rows.emplace_back(tok, std::move(v));
  }
  return FeatureTable("rand", tmpl.key_kind(), tmpl.dim(), std::move(rows));
}

}  // namespace disa::fusion

#endif  // DISA_FUSION_HPP
