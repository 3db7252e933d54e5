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


#include <gtest/gtest.h>

#include "disa/pinyin.hpp"

using namespace disa;
using namespace disa::pinyin;

namespace {

const Lexicon& core() {
  static const Lexicon lex = Lexicon::load(DISA_DATA_DIR "/lexicon_core.tsv");
  return lex;
}

}  // namespace

TEST(Syllable, ParsesCanonicalForms) {
  EXPECT_EQ(parse_syllable("jia3"), (Syllable{"jia", 3}));
  EXPECT_EQ(parse_syllable("a0"), (Syllable{"a", 0}));
  EXPECT_EQ(parse_syllable("lv4").base, "lv");
}

TEST(Syllable, RejectsMalformed) {
  EXPECT_THROW(parse_syllable("Jia3"), ParseError);
  EXPECT_THROW(parse_syllable("jia"), ParseError);
  EXPECT_THROW(parse_syllable("jia5"), ParseError);
  EXPECT_THROW(parse_syllable("jia33"), ParseError);
  EXPECT_THROW(parse_syllable(""), ParseError);
  try {
    parse_syllable("jia7");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 3u);
  }
}

TEST(Syllable, RoundTrips) {
  for (const char* s : {"a0", "zhuang4", "lv2", "er3", "de0"}) EXPECT_EQ(format_syllable(parse_syllable(s)), s);
}

TEST(ToneVariants, FiveInAscendingOrder) {
  const auto v = tone_variants("a");
  ASSERT_EQ(v.size(), 5u);
  for (int t = 0; t < 5; ++t) EXPECT_EQ(v[static_cast<std::size_t>(t)].str(), "a" + std::to_string(t));
  EXPECT_EQ(tone_variants("jia")[4].str(), "jia4");
  EXPECT_THROW(tone_variants(""), InvalidArgument);
}

TEST(Lexicon, CharToBase) {
  EXPECT_EQ(char_to_base(core(), U'假'), "jia");
  EXPECT_EQ(char_to_base(core(), U'明'), "ming");
  EXPECT_EQ(char_to_base(core(), U'Q'), std::nullopt);
  EXPECT_EQ(char_to_base(core(), U'Q', UnknownPolicy::unk), "<unk>");
  EXPECT_THROW(char_to_base(core(), U'Q', UnknownPolicy::error), UnknownTokenError);
}

TEST(Lexicon, ReadingsSortedByRankAndInventoryBounds) {
  const auto& lex = core();
  for (char32_t ch : lex.characters()) {
    const auto& r = lex.readings(ch);
    ASSERT_FALSE(r.empty());
    for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LT(r[i - 1].rank, r[i].rank);
  }
  const auto tl = lex.toneless_inventory().size(), td = lex.toned_inventory().size();
  EXPECT_LE(tl, td);
  EXPECT_LE(td, 5 * tl);
}

TEST(Lexicon, ParseSortsByRank) {
  const auto lex = Lexicon::parse({"# c", "好\thao\t4\t2", "好\thao\t3\t1"});
  EXPECT_EQ(lex.primary(U'好'), (Syllable{"hao", 3}));
}

TEST(Lexicon, ParseErrorsCarryLineNumbers) {
  try {
    Lexicon::parse({"好\thao\t3\t1", "坏\thuai\t9\t1"});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(Lexicon::parse({"好\thao\t3"}), ParseError);
  EXPECT_THROW(Lexicon::parse({"好\tHao\t3\t1"}), ParseError);
  EXPECT_THROW(Lexicon::parse({"好\thao\t3\t1", "好\thao\t4\t1"}), ParseError);
}

TEST(Lexicon, SerializeRoundTrips) {
  const auto& lex = core();
  const auto again = Lexicon::parse(text::split(lex.serialize(), '\n'));
  ASSERT_EQ(again.characters(), lex.characters());
  for (char32_t ch : lex.characters()) {
    const auto& a = lex.readings(ch);
    const auto& b = again.readings(ch);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].syllable, b[i].syllable);
      EXPECT_EQ(a[i].rank, b[i].rank);
    }
  }
  EXPECT_EQ(again.phrases(), lex.phrases());
}

TEST(Convert, TonedExample) {
  const auto out = convert_corpus(core(), {"假设明天放假"}, ConversionMode::toned);
  EXPECT_EQ(out, std::vector<std::string>{"jia3 she4 ming2 tian1 fang4 jia4"});
}

TEST(Convert, TonelessExample) {
  const auto out = convert_corpus(core(), {"假设明天放假"}, ConversionMode::toneless);
  EXPECT_EQ(out, std::vector<std::string>{"jia she ming tian fang jia"});
}

TEST(Convert, EmptyLineStaysEmpty) {
  EXPECT_EQ(convert_corpus(core(), {""}, ConversionMode::toned), std::vector<std::string>{""});
}

TEST(Convert, UnknownPolicies) {
  ConversionStats st;
  EXPECT_EQ(convert_corpus(core(), {"明X天"}, ConversionMode::toneless, UnknownPolicy::skip, &st),
            std::vector<std::string>{"ming tian"});
  EXPECT_EQ(st.skipped, 1u);
  EXPECT_EQ(st.recognized, 2u);
  EXPECT_EQ(convert_corpus(core(), {"明X天"}, ConversionMode::toneless, UnknownPolicy::unk),
            std::vector<std::string>{"ming <unk> tian"});
  try {
    convert_corpus(core(), {"明天", "明X"}, ConversionMode::toned, UnknownPolicy::error);
    FAIL();
  } catch (const UnknownTokenError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Convert, InvalidUtf8ReportsLine) {
  try {
    convert_corpus(core(), {"明", "\xff"}, ConversionMode::toned);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Convert, BaseMatchesStrippedTonedForm) {
  const auto& lex = core();
  for (char32_t ch : lex.characters()) {
    const std::string line = text::utf8_encode(ch);
    const auto toned = convert_corpus(lex, {line}, ConversionMode::toned)[0];
    EXPECT_EQ(*char_to_base(lex, ch), strip_tone(toned)) << line;
  }
}

TEST(Convert, DeterministicAndLengthPreserving) {
  const std::vector<std::string> lines{"我们 明天 放假", "好的！", "天天开心"};
  ConversionStats st;
  const auto a = convert_corpus(core(), lines, ConversionMode::toned, UnknownPolicy::skip, &st);
  EXPECT_EQ(a, convert_corpus(core(), lines, ConversionMode::toned));
  std::size_t tokens = 0;
  for (const auto& l : a) tokens += text::split_ws(l).size();
  EXPECT_EQ(tokens, st.recognized);
}
