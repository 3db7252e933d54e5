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


#ifndef DISA_PINYIN_HPP
#define DISA_PINYIN_HPP

// Character to pinyin lexicon, syllable parsing and corpus conversion.
//
// Lexicon file: UTF-8 TSV with rows `char<TAB>base<TAB>tone<TAB>rank`,
// '#' comments. A row whose first field holds several characters is a
// phrase reading: `放假<TAB>fang jia<TAB>4 4<TAB>1`. Phrases are matched
// longest-first during conversion; everything else uses the rank-1 reading.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "disa/error.hpp"
#include "disa/text.hpp"

namespace disa::pinyin {

inline constexpr int kToneCount = 5;
inline constexpr std::string_view kUnknownToken = "<unk>";

/// Romanized base plus tone; tone 0 is neutral, 1-4 the four contours.
/// "v" stands for ü.
struct Syllable {
  std::string base;
  int tone = 0;

  std::string str() const { return base + static_cast<char>('0' + tone); }
  friend auto operator<=>(const Syllable&, const Syllable&) = default;
};

inline bool valid_base(std::string_view base) {
  if (base.empty()) return false;
  return std::all_of(base.begin(), base.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

/// Parses the canonical form `[a-z]+[0-4]`.
inline Syllable parse_syllable(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && text[i] >= 'a' && text[i] <= 'z') ++i;
  if (i == 0) throw ParseError("syllable must start with a lowercase letter: '" + std::string(text) + "'", 0);
  if (i == text.size()) throw ParseError("syllable is missing its tone digit: '" + std::string(text) + "'", i);
  if (text[i] < '0' || text[i] > '4')
    throw ParseError("invalid tone character in syllable '" + std::string(text) + "'", i);
  if (i + 1 != text.size()) throw ParseError("trailing characters in syllable '" + std::string(text) + "'", i + 1);
  return {std::string(text.substr(0, i)), text[i] - '0'};
}

inline std::string format_syllable(const Syllable& s) { return s.str(); }

/// The five toned variants of a base, tones 0..4 in order.
inline std::vector<Syllable> tone_variants(std::string_view base) {
  if (base.empty()) throw InvalidArgument("tone_variants needs a non-empty base");
  std::vector<Syllable> out;
  for (int t = 0; t < kToneCount; ++t) out.push_back({std::string(base), t});
  return out;
}

/// Strips a trailing tone digit if present.
inline std::string strip_tone(std::string_view token) {
  if (!token.empty() && token.back() >= '0' && token.back() <= '4') token.remove_suffix(1);
  return std::string(token);
}

struct Reading {
  Syllable syllable;
  int rank = 1;  // 1 = most frequent
};

enum class UnknownPolicy { skip, error, unk };

inline UnknownPolicy parse_unknown_policy(std::string_view s) {
  if (s == "skip") return UnknownPolicy::skip;
  if (s == "error") return UnknownPolicy::error;
  if (s == "unk") return UnknownPolicy::unk;
  throw InvalidArgument("unknown-character policy must be skip, error or unk; got '" + std::string(s) + "'");
}

class Lexicon {
 public:
  Lexicon() = default;

  /// Adds one reading. Call `finalize` once all readings are in.
  void add(char32_t ch, Syllable syllable, int rank) {
    if (!valid_base(syllable.base)) throw ParseError("invalid pinyin base '" + syllable.base + "'", 0);
    if (syllable.tone < 0 || syllable.tone > 4) throw RangeError("tone must be in 0..4");
    if (rank < 1) throw RangeError("reading rank must be >= 1");
    auto& list = entries_[ch];
    for (const auto& r : list)
      if (r.rank == rank || r.syllable == syllable)
        throw InvalidArgument("duplicate reading for " + text::utf8_encode(ch));
    if (list.empty()) order_.push_back(ch);
    list.push_back({std::move(syllable), rank});
  }

  void add_phrase(std::u32string phrase, std::vector<Syllable> readings) {
    if (phrase.size() < 2 || phrase.size() != readings.size())
      throw InvalidArgument("phrase reading needs one syllable per character");
    max_phrase_ = std::max(max_phrase_, phrase.size());
    phrases_[std::move(phrase)] = std::move(readings);
  }

  void finalize() {
    for (auto& [ch, list] : entries_)
      std::stable_sort(list.begin(), list.end(), [](const Reading& a, const Reading& b) { return a.rank < b.rank; });
    toneless_.clear();
    toned_.clear();
    for (const auto& [ch, list] : entries_)
      for (const auto& r : list) {
        toneless_.insert(r.syllable.base);
        toned_.insert(r.syllable.str());
      }
    if (!(toneless_.size() <= toned_.size() && toned_.size() <= kToneCount * toneless_.size()))
      throw InvalidArgument("lexicon inventory violates toneless <= toned <= 5 * toneless");
  }

  bool contains(char32_t ch) const { return entries_.count(ch) != 0; }
  std::size_t size() const noexcept { return entries_.size(); }

  const std::vector<Reading>& readings(char32_t ch) const {
    auto it = entries_.find(ch);
    if (it == entries_.end()) throw UnknownTokenError("character not in lexicon: " + text::utf8_encode(ch));
    return it->second;
  }

  /// Most frequent reading; the heteronym policy of every conversion.
  const Syllable& primary(char32_t ch) const { return readings(ch).front().syllable; }

  /// Characters in insertion order.
  const std::vector<char32_t>& characters() const noexcept { return order_; }

  const std::set<std::string>& toneless_inventory() const noexcept { return toneless_; }
  const std::set<std::string>& toned_inventory() const noexcept { return toned_; }

  const std::map<std::u32string, std::vector<Syllable>>& phrases() const noexcept { return phrases_; }
  std::size_t max_phrase_length() const noexcept { return max_phrase_; }

  static Lexicon parse(const std::vector<std::string>& lines) {
    Lexicon lex;
    for (std::size_t n = 0; n < lines.size(); ++n) {
      const std::string_view line = text::trim(lines[n]);
      if (line.empty() || line.front() == '#') continue;
      const auto fields = text::split(line, '\t');
      if (fields.size() != 4) throw ParseError("lexicon row needs 4 tab-separated fields", 0, n + 1);
      std::u32string chars;
      try {
        chars = text::utf8_decode(fields[0]);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), e.offset(), n + 1);
      }
      if (chars.empty()) throw ParseError("empty character field", 0, n + 1);
      try {
        const int rank = static_cast<int>(text::parse_int(fields[3]));
        if (chars.size() == 1) {
          const auto tone = text::parse_int(fields[2]);
          if (tone < 0 || tone > 4) throw RangeError("tone out of range");
          lex.add(chars[0], Syllable{fields[1], static_cast<int>(tone)}, rank);
        } else {
          const auto bases = text::split_ws(fields[1]);
          const auto tones = text::split_ws(fields[2]);
          if (bases.size() != chars.size() || tones.size() != chars.size())
            throw ParseError("phrase needs one base and tone per character", 0, n + 1);
          std::vector<Syllable> syl;
          for (std::size_t k = 0; k < chars.size(); ++k) {
            const auto tone = text::parse_int(tones[k]);
            if (tone < 0 || tone > 4 || !valid_base(bases[k])) throw RangeError("invalid phrase syllable");
            syl.push_back({bases[k], static_cast<int>(tone)});
          }
          lex.add_phrase(std::move(chars), std::move(syl));
        }
      } catch (const ParseError& e) {
        throw ParseError(std::string("lexicon line ") + std::to_string(n + 1) + ": " + e.what(), e.offset(), n + 1);
      } catch (const Error& e) {
        throw ParseError(std::string("lexicon line ") + std::to_string(n + 1) + ": " + e.what(), 0, n + 1);
      }
    }
    lex.finalize();
    return lex;
  }

  static Lexicon load(const std::string& path) { return parse(text::read_lines(path)); }

  std::string serialize() const {
    std::ostringstream out;
    out << "# char\tbase\ttone\trank\n";
    for (char32_t ch : order_)
      for (const auto& r : entries_.at(ch))
        out << text::utf8_encode(ch) << '\t' << r.syllable.base << '\t' << r.syllable.tone << '\t' << r.rank << '\n';
    for (const auto& [phrase, syl] : phrases_) {
      std::vector<std::string> bases, tones;
      for (const auto& s : syl) {
        bases.push_back(s.base);
        tones.push_back(std::to_string(s.tone));
      }
      out << text::utf8_encode(phrase) << '\t' << text::join(bases, " ") << '\t' << text::join(tones, " ") << "\t1\n";
    }
    return out.str();
  }

 private:
  std::unordered_map<char32_t, std::vector<Reading>> entries_;
  std::vector<char32_t> order_;
  std::map<std::u32string, std::vector<Syllable>> phrases_;
  std::size_t max_phrase_ = 0;
  std::set<std::string> toneless_;
  std::set<std::string> toned_;
};

/// Base of the rank-1 reading. Returns nullopt when the character is unknown
/// and the policy is skip, "<unk>" under unk, and throws under error.
inline std::optional<std::string> char_to_base(const Lexicon& lex, char32_t ch,
                                               UnknownPolicy policy = UnknownPolicy::skip) {
  if (lex.contains(ch)) return lex.primary(ch).base;
  switch (policy) {
    case UnknownPolicy::skip: return std::nullopt;
    case UnknownPolicy::unk: return std::string(kUnknownToken);
    case UnknownPolicy::error: break;
  }
  throw UnknownTokenError("character not in lexicon: " + text::utf8_encode(ch));
}

enum class ConversionMode { toneless, toned };

/// One recognized character of a sentence with its resolved reading.
struct CharReading {
  char32_t ch = 0;
  Syllable syllable;
};

struct ConversionStats {
  std::size_t recognized = 0;
  std::size_t skipped = 0;
  std::size_t unknown_tokens = 0;
};

/// Resolves each non-space character of a line: phrase readings first
/// (longest match), rank-1 otherwise. Unknown characters are dropped from the
/// result under skip and unk (unk only affects token output) and raise under
/// error.
inline std::vector<CharReading> read_line(const Lexicon& lex, std::u32string_view line, UnknownPolicy policy,
                                          ConversionStats* stats = nullptr, std::size_t line_no = 0) {
  std::vector<CharReading> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (text::is_space(line[i])) {
      ++i;
      continue;
    }
    bool matched = false;
    for (std::size_t len = std::min(lex.max_phrase_length(), line.size() - i); len >= 2; --len) {
      auto it = lex.phrases().find(std::u32string(line.substr(i, len)));
      if (it == lex.phrases().end()) continue;
      for (std::size_t k = 0; k < len; ++k) out.push_back({line[i + k], it->second[k]});
      if (stats) stats->recognized += len;
      i += len;
      matched = true;
      break;
    }
    if (matched) continue;
    if (lex.contains(line[i])) {
      out.push_back({line[i], lex.primary(line[i])});
      if (stats) ++stats->recognized;
    } else if (policy == UnknownPolicy::error) {
      throw UnknownTokenError("line " + std::to_string(line_no) + ": character not in lexicon: " +
                              text::utf8_encode(line[i]));
    } else if (policy == UnknownPolicy::unk) {
      out.push_back({line[i], Syllable{}});
      if (stats) ++stats->unknown_tokens;
    } else if (stats) {
      ++stats->skipped;
    }
    ++i;
  }
  return out;
}

inline std::string reading_token(const CharReading& r, ConversionMode mode) {
  if (r.syllable.base.empty()) return std::string(kUnknownToken);
  return mode == ConversionMode::toned ? r.syllable.str() : r.syllable.base;
}

/// Converts corpus lines into space-separated pinyin token lines, one token
/// per recognized character. Line numbers in errors are 1-based.
inline std::vector<std::string> convert_corpus(const Lexicon& lex, const std::vector<std::string>& lines,
                                               ConversionMode mode, UnknownPolicy policy = UnknownPolicy::skip,
                                               ConversionStats* stats = nullptr) {
  std::vector<std::string> out;
  out.reserve(lines.size());
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::u32string decoded;
    try {
      decoded = text::utf8_decode(lines[n]);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(n + 1) + ": " + e.what(), e.offset(), n + 1);
    }
    std::vector<std::string> tokens;
    for (const auto& r : read_line(lex, decoded, policy, stats, n + 1)) tokens.push_back(reading_token(r, mode));
    out.push_back(text::join(tokens, " "));
  }
  return out;
}

}  // namespace disa::pinyin

#endif  // DISA_PINYIN_HPP
