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

#include <bit>
#include <set>

#include "disa/synthetic.hpp"
#include "disa/training.hpp"

using namespace disa;
using namespace disa::train;

namespace {

struct Toy {
  synth::SyntheticTask task;
  eval::FeatureSet features;
};

const Toy& toy() {
  static const Toy t = [] {
    Toy out{synth::make_synthetic_task(5, 200), {}};
    synth::FeatureOptions fo;
    fo.dim = 8;
    fo.glove_epochs = 10;
    out.features = synth::build_features(out.task, fo);
    return out;
  }();
  return t;
}

struct Splits {
  fusion::FusedLookup lookup;
  std::vector<EncodedSample> train, dev;
};

Splits splits(const std::string& combo) {
  const auto& t = toy();
  Splits s{eval::build_lookup(t.features, combo, t.task.lexicon), {}, {}};
  const auto sp = eval::split_622(t.task.dataset, 5);
  s.train = encode_samples(s.lookup, t.task.lexicon, eval::select(t.task.dataset, sp.train));
  s.dev = encode_samples(s.lookup, t.task.lexicon, eval::select(t.task.dataset, sp.dev));
  return s;
}

TrainConfig short_config(int p1, int p2, int p3) {
  auto cfg = synth::train_config();
  cfg.schedule = {p1, p2, p3, 20, 9};
  return cfg;
}

}  // namespace

TEST(DeriveSeed, StreamsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 1; s <= 15; ++s) seen.insert(derive_seed(42, s));
  EXPECT_EQ(seen.size(), 15u);
  EXPECT_EQ(derive_seed(42, 3), derive_seed(42, 3));
  EXPECT_NE(derive_seed(42, 3), derive_seed(43, 3));
}

TEST(Encode, TeacherTonesAndCoverage) {
  const auto lex = pinyin::Lexicon::load(DISA_DATA_DIR "/lexicon_core.tsv");
  std::vector<FeatureTable::Row> rows;
  for (const char* c : {"假", "放", "明"}) rows.emplace_back(c, num::Vector::Ones(2));
  const FeatureTable T("T", KeyKind::character, 2, rows);
  const auto lookup = fusion::build_fused({&T, nullptr, nullptr}, lex);
  // The phrase reading of 放假 overrides the rank-1 tone of 假.
  const auto s = encode_sentence(lookup, lex, "假X放假明");
  ASSERT_EQ(s.chars.size(), 4u);
  EXPECT_EQ(s.teacher, (std::vector<int>{3, 4, 4, 2}));
  for (const auto& r : s.rows)
    for (int a = 0; a < 5; ++a) EXPECT_EQ(r[static_cast<std::size_t>(a)], r[0]);
  EXPECT_TRUE(encode_sentence(lookup, lex, "QQ").rows.empty());
}

TEST(ThreePhase, EmptyScheduleReturnsInitialization) {
  const auto s = splits("T+P");
  const auto m0 = model::init_model(s.lookup.dim(), 16, 2, 3);
  const auto r = train_three_phase(m0, s.lookup, s.train, s.dev, short_config(0, 0, 0));
  EXPECT_EQ(r.best_epoch, 0);
  EXPECT_TRUE(r.log.empty());
  EXPECT_TRUE(r.model == m0);
  EXPECT_EQ(r.best_dev_accuracy, accuracy(m0, s.dev, true));
}

TEST(ThreePhase, PhasesRunInOrder) {
  const auto s = splits("T+P");
  const auto r = train_three_phase(model::init_model(s.lookup.dim(), 16, 2, 3), s.lookup, s.train, s.dev,
                                   short_config(1, 2, 1));
  EXPECT_TRUE(r.used_policy);
  ASSERT_EQ(r.log.size(), 4u);
  const int phases[] = {1, 2, 2, 3};
  for (std::size_t e = 0; e < 4; ++e) {
    const auto& rec = r.log[e];
    EXPECT_EQ(rec.epoch, static_cast<int>(e) + 1);
    EXPECT_EQ(rec.phase, phases[e]);
    EXPECT_EQ(rec.critic_updates > 0, rec.phase != 2);
    EXPECT_EQ(rec.policy_updates > 0, rec.phase != 1);
    EXPECT_EQ(std::isnan(rec.mean_reward), rec.phase == 1);
    if (rec.phase != 1) {
      EXPECT_LE(rec.mean_reward, 0.0);
    }
  }
  EXPECT_GE(r.best_epoch, 1);
  EXPECT_EQ(r.best_dev_accuracy, r.log[static_cast<std::size_t>(r.best_epoch - 1)].dev_accuracy);
  EXPECT_EQ(accuracy(r.model, s.dev, true), r.best_dev_accuracy);
}

TEST(ThreePhase, CriticFrozenDuringPolicyPhase) {
  const auto s = splits("P");
  model::DisaModel after_phase1, after_phase2;
  train_three_phase(model::init_model(s.lookup.dim(), 16, 2, 3), s.lookup, s.train, s.dev, short_config(1, 2, 0),
                    [&](const EpochRecord& rec, const model::DisaModel& m) {
                      if (rec.epoch == 1) after_phase1 = m;
                      if (rec.epoch == 3) after_phase2 = m;
                    });
  EXPECT_EQ(after_phase1.critic.W_f, after_phase2.critic.W_f);
  EXPECT_EQ(after_phase1.W_sfmx, after_phase2.W_sfmx);
  EXPECT_NE(after_phase1.policy_W, after_phase2.policy_W);
}

TEST(ThreePhase, TextOnlyNeverUsesPolicy) {
  const auto s = splits("T");
  const auto r = train_three_phase(model::init_model(s.lookup.dim(), 16, 2, 3), s.lookup, s.train, s.dev,
                                   short_config(1, 1, 1));
  EXPECT_FALSE(r.used_policy);
  for (const auto& rec : r.log) {
    EXPECT_EQ(rec.phase, 1);
    EXPECT_EQ(rec.policy_updates, 0u);
  }
}

TEST(ThreePhase, SeededRunsAreBitExact) {
  const auto s = splits("T+P");
  const auto run = [&] {
    return train_three_phase(model::init_model(s.lookup.dim(), 16, 2, 3), s.lookup, s.train, s.dev,
                             short_config(1, 1, 1));
  };
  const auto a = run(), b = run();
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t e = 0; e < a.log.size(); ++e) {
    EXPECT_EQ(a.log[e].dev_accuracy, b.log[e].dev_accuracy);
    // NaN marks "not measured in this phase"; compare bit patterns.
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a.log[e].critic_loss), std::bit_cast<std::uint64_t>(b.log[e].critic_loss));
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a.log[e].mean_reward), std::bit_cast<std::uint64_t>(b.log[e].mean_reward));
  }
  EXPECT_TRUE(a.model == b.model);
}

TEST(ThreePhase, RejectsBadInput) {
  const auto s = splits("T");
  const auto m = model::init_model(s.lookup.dim(), 16, 2, 3);
  EXPECT_THROW(train_three_phase(m, s.lookup, s.train, {}, short_config(1, 0, 0)), InvalidArgument);
  auto cfg = short_config(1, 0, 0);
  cfg.schedule.batch_size = 0;
  EXPECT_THROW(train_three_phase(m, s.lookup, s.train, s.dev, cfg), RangeError);
  EXPECT_THROW(train_three_phase(m, s.lookup, s.train, s.dev, short_config(-1, 0, 0)), RangeError);
}

TEST(Predict, DeterministicAndAnnotated) {
  const auto s = splits("T+P");
  const auto& lex = toy().task.lexicon;
  const auto m = model::init_model(s.lookup.dim(), 16, 2, 3);
  const auto& text = toy().task.dataset.samples[0].text;
  const auto a = predict(m, s.lookup, lex, text), b = predict(m, s.lookup, lex, text);
  EXPECT_EQ(a.label, b.label);
  EXPECT_EQ(a.distr, b.distr);
  EXPECT_EQ(a.pinyin, b.pinyin);
  EXPECT_EQ(a.pinyin.size(), text::utf8_decode(text).size());
  EXPECT_NEAR(a.distr.sum(), 1.0, 1e-12);
  for (const auto& p : a.pinyin) EXPECT_NO_THROW(pinyin::parse_syllable(p));
  const auto one = predict(m, s.lookup, lex, text::utf8_encode(text::utf8_decode(text)[0]));
  EXPECT_EQ(one.pinyin.size(), 1u);
  EXPECT_THROW(predict(m, s.lookup, lex, "QQ"), InvalidArgument);
}

TEST(Predict, EmptySentenceFallsBackToPrior) {
  auto m = model::init_model(4, 3, 2, 1);
  m.b_sfmx << 0.0, 2.0;
  const auto p = predict_encoded(m, {}, true);
  EXPECT_EQ(p.label, 1);
  EXPECT_EQ(p.distr, model::prior_distribution(m));
}

TEST(Accuracy, LearnsSeparableTask) {
  // Label 1 iff the sentence contains 好; the critic alone must find it.
  const auto lex = pinyin::Lexicon::load(DISA_DATA_DIR "/lexicon_core.tsv");
  const std::vector<std::string> chars{"好", "开", "心", "天", "明", "我"};
  num::Rng rng(3);
  std::vector<FeatureTable::Row> rows;
  for (const auto& c : chars) {
    num::Vector v(6);
    for (int k = 0; k < 6; ++k) v(k) = num::standard_normal(rng);
    rows.emplace_back(c, v);
  }
  const FeatureTable T("T", KeyKind::character, 6, rows);
  const auto lookup = fusion::build_fused({&T, nullptr, nullptr}, lex);
  std::vector<Sample> data;
  for (int i = 0; i < 300; ++i) {
    std::string s;
    const auto len = 2 + num::uniform_index(rng, 4);
    for (std::size_t k = 0; k < len; ++k) s += chars[1 + num::uniform_index(rng, 5)];
    const int y = static_cast<int>(num::uniform_index(rng, 2));
    if (y) s.insert(3 * num::uniform_index(rng, len + 1), "好");
    data.push_back({s, y});
  }
  const auto train = encode_samples(lookup, lex, {data.begin(), data.begin() + 200});
  const auto dev = encode_samples(lookup, lex, {data.begin() + 200, data.end()});
  auto cfg = short_config(20, 0, 0);
  cfg.dropout = 0;
  const auto r = train_three_phase(model::init_model(6, 8, 2, 3), lookup, train, dev, cfg);
  EXPECT_GE(r.best_dev_accuracy, 0.95);
  EXPECT_THROW(accuracy(r.model, {}, false), InvalidArgument);
}
