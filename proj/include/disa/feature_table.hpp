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


#ifndef DISA_FEATURE_TABLE_HPP
#define DISA_FEATURE_TABLE_HPP

// Immutable token -> vector lookup shared by every modality.
//
// File format (UTF-8):
//   #featuretable v1 dim=<D> modality=<label>
//   token<TAB>v1,v2,...,vD
// Values are written as the shortest decimal that round-trips a 32-bit float.

#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "disa/numerics/tensor.hpp"
#include "disa/pinyin.hpp"
#include "disa/text.hpp"

namespace disa {

/// What the keys of a table are: single characters (T, V), toneless bases
/// (Ex0, PO) or canonical toned syllables (Ex04, PW, P).
enum class KeyKind { character, base, toned };

inline const char* to_string(KeyKind k) {
  switch (k) {
    case KeyKind::character: return "character";
    case KeyKind::base: return "base";
    case KeyKind::toned: return "toned";
  }
  return "?";
}

class FeatureTable {
 public:
  using Row = std::pair<std::string, num::Vector>;

  FeatureTable() = default;

  FeatureTable(std::string modality, KeyKind kind, int dim, std::vector<Row> rows)
      : modality_(std::move(modality)), kind_(kind), dim_(dim) {
    if (dim_ < 1) throw ShapeError("feature table dimension must be positive");
    tokens_.reserve(rows.size());
    rows_.reserve(rows.size());
    for (auto& [token, vec] : rows) {
      if (vec.size() != dim_)
        throw ShapeError("row '" + token + "' has length " + std::to_string(vec.size()) + ", table dim is " +
                         std::to_string(dim_));
      num::require_finite(num::view(vec), "feature row");
      if (!index_.emplace(token, tokens_.size()).second) throw InvalidArgument("duplicate token '" + token + "'");
      tokens_.push_back(std::move(token));
      rows_.push_back(std::move(vec));
    }
  }

  const std::string& modality() const noexcept { return modality_; }
  KeyKind key_kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

  bool contains(std::string_view token) const { return index_.count(std::string(token)) != 0; }

  const num::Vector& row(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) throw UnknownTokenError("token '" + std::string(token) + "' not in " + modality_ + " table");
    return rows_[it->second];
  }

  const num::Vector* find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? nullptr : &rows_[it->second];
  }

  /// Tokens in insertion order.
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const num::Vector& row_at(std::size_t i) const { return rows_.at(i); }

  /// Same table with every value rounded to float, i.e. what a
  /// serialize/parse round trip yields.
  FeatureTable rounded_to_float() const {
    std::vector<Row> rows;
    rows.reserve(size());
    for (std::size_t i = 0; i < size(); ++i)
      rows.emplace_back(tokens_[i], rows_[i].unaryExpr([](double v) { return double(static_cast<float>(v)); }));
    return FeatureTable(modality_, kind_, dim_, std::move(rows));
  }

  std::string serialize() const {
    std::string out = "#featuretable v1 dim=" + std::to_string(dim_) + " modality=" + modality_ + "\n";
    for (std::size_t i = 0; i < size(); ++i) {
      out += tokens_[i];
      out += '\t';
      for (Eigen::Index k = 0; k < dim_; ++k) {
        if (k) out += ',';
        out += text::format_real32(static_cast<float>(rows_[i](k)));
      }
      out += '\n';
    }
    return out;
  }

  static FeatureTable parse(const std::vector<std::string>& lines) {
    if (lines.empty()) throw ParseError("feature table is empty", 0, 1);
    const auto head = text::split_ws(lines[0]);
    if (head.size() != 4 || head[0] != "#featuretable" || head[1] != "v1" || head[2].rfind("dim=", 0) != 0 ||
        head[3].rfind("modality=", 0) != 0)
      throw ParseError("bad feature table header", 0, 1);
    const int dim = static_cast<int>(text::parse_int(std::string_view(head[2]).substr(4)));
    std::string modality = head[3].substr(9);
    std::vector<Row> rows;
    for (std::size_t n = 1; n < lines.size(); ++n) {
      if (lines[n].empty()) continue;
      const auto tab = lines[n].find('\t');
      if (tab == std::string::npos) throw ParseError("row without tab", 0, n + 1);
      const auto values = text::split(std::string_view(lines[n]).substr(tab + 1), ',');
      if (static_cast<int>(values.size()) != dim)
        throw ParseError("row has " + std::to_string(values.size()) + " values, expected " + std::to_string(dim),
                         tab + 1, n + 1);
      num::Vector v(dim);
      for (int k = 0; k < dim; ++k) {
        try {
          v(k) = double(text::parse_real32(values[static_cast<std::size_t>(k)]));
        } catch (const ParseError& e) {
          throw ParseError(e.what(), tab + 1, n + 1);
        }
      }
      rows.emplace_back(lines[n].substr(0, tab), std::move(v));
    }
    const KeyKind kind = infer_kind(modality, rows);
    return FeatureTable(std::move(modality), kind, dim, std::move(rows));
  }

  static FeatureTable load(const std::string& path) { return parse(text::read_lines(path)); }
  void save(const std::string& path) const { text::write_text(path, serialize()); }

  /// Key kind for a modality label; unknown labels are classified from the
  /// keys themselves.
  static KeyKind infer_kind(std::string_view modality, const std::vector<Row>& rows) {
    if (modality == "T" || modality == "V") return KeyKind::character;
    if (modality == "Ex0" || modality == "PO" || modality == "Ex0+PO") return KeyKind::base;
    if (modality == "Ex04" || modality == "PW" || modality == "P" || modality == "rand" ||
        modality.find('+') != std::string_view::npos)
      return KeyKind::toned;
    bool all_base = !rows.empty(), all_toned = !rows.empty();
    for (const auto& [token, v] : rows) {
      all_base = all_base && pinyin::valid_base(token);
      const bool toned = token.size() >= 2 && pinyin::valid_base(std::string_view(token).substr(0, token.size() - 1)) &&
                         token.back() >= '0' && token.back() <= '4';
      all_toned = all_toned && toned;
    }
    if (all_toned) return KeyKind::toned;
    if (all_base) return KeyKind::base;
    return KeyKind::character;
  }

 private:
  std::string modality_;
  KeyKind kind_ = KeyKind::character;
  int dim_ = 0;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<num::Vector> rows_;
};

/// Phonetic tables are feature tables keyed by base (Ex0, PO) or by toned
/// syllable (Ex04, PW, P and their combinations).
using PhoneticTable = FeatureTable;

/// Row for a toned syllable: toned tables look up "base<tone>", base-keyed
/// tables ignore the tone. Returns nullptr when absent.
inline const num::Vector* phonetic_row(const PhoneticTable& table, const pinyin::Syllable& s) {
  switch (table.key_kind()) {
    case KeyKind::toned: return table.find(s.str());
    case KeyKind::base: return table.find(s.base);
    case KeyKind::character: break;
  }
  throw InvalidArgument("table '" + table.modality() + "' is not a phonetic table");
}

}  // namespace disa

#endif  // DISA_FEATURE_TABLE_HPP
