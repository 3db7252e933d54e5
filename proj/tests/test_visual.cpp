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

#include <filesystem>

#include "disa/gradient_suite.hpp"
#include "disa/visual.hpp"

using namespace disa;
using namespace disa::vis;

namespace {

ConvAeOptions toy_options() {
  ConvAeOptions o;
  o.arch = gradsuite::toy_convae_architecture();
  o.epochs = 15;
  o.batch_size = 4;
  o.learning_rate = 0.01;
  o.seed = 3;
  return o;
}

}  // namespace

TEST(ConvAe, DefaultShapeChain) {
  const ConvAeArchitecture arch;
  EXPECT_EQ(arch.shape_chain(), (std::vector<int>{56, 27, 12, 5, 1}));
  EXPECT_EQ(arch.feature_dim(), 512);
  EXPECT_NO_THROW(arch.check());
  const auto m = init_convae(arch, 1);
  const auto t = forward_trace(m, synthetic_bitmaps(1, 1)[0]);
  ASSERT_EQ(t.activations.size(), 6u);
  const int expect[] = {60, 56, 27, 12, 5, 1};
  for (std::size_t i = 0; i < t.activations.size(); ++i) EXPECT_EQ(t.activations[i].shape()[0], expect[i]);
  EXPECT_EQ(t.dense.back().size(), 3600);
}

TEST(ConvAe, RejectsBrokenArchitectures) {
  ConvAeArchitecture a;
  a.encoder.pop_back();
  EXPECT_THROW(a.check(), ShapeError);
  ConvAeArchitecture b;
  b.decoder.back() = 100;
  EXPECT_THROW(b.check(), ShapeError);
  const auto m = init_convae(gradsuite::toy_convae_architecture(), 1);
  EXPECT_THROW(encode_char(m, synthetic_bitmaps(1, 1)[0]), ShapeError);
}

TEST(ConvAe, ZeroWeightsGiveZeroFeature) {
  auto m = init_convae(ConvAeArchitecture{}, 5);
  for (auto block : m.parameter_blocks()) std::fill(block.begin(), block.end(), 0.0);
  EXPECT_EQ(encode_char(m, synthetic_bitmaps(1, 9)[0]), num::Vector::Zero(512));
}

TEST(ConvAe, IdenticalBitmapsIdenticalFeatures) {
  const auto m = init_convae(ConvAeArchitecture{}, 5);
  auto b = synthetic_bitmaps(1, 4)[0];
  auto c = b;
  c.ch = U'X';
  EXPECT_EQ(encode_char(m, b), encode_char(m, c));
  const auto r = reconstruct(m, b);
  for (double p : r.pixels) EXPECT_TRUE(p >= 0.0 && p <= 1.0);
}

TEST(ReconstructionLoss, Examples) {
  const auto b = synthetic_bitmaps(1, 2, 8)[0];
  EXPECT_EQ(reconstruction_loss(b, b), 0.0);
  std::vector<double> zero(64, 0.0), one = zero;
  one[17] = 1.0;
  EXPECT_DOUBLE_EQ(reconstruction_loss(CharBitmap(1, 8, one), CharBitmap(1, 8, zero)), 2.0);
  EXPECT_THROW(reconstruction_loss(CharBitmap(1, 8, zero), CharBitmap(1, 4, std::vector<double>(16))), ShapeError);
}

TEST(ReconstructionLoss, MatchesScalarLoop) {
  num::Rng rng(8);
  std::vector<double> a(500), b(500);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = num::uniform01(rng);
    b[i] = 3.0 * num::standard_normal(rng);
  }
  double ref = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ref += std::fabs(a[i] - b[i]) + (a[i] - b[i]) * (a[i] - b[i]);
  EXPECT_NEAR(reconstruction_loss(a, b), ref, 1e-12 * ref);
}

TEST(ConvAeGradient, MatchesFiniteDifferences) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto r = gradsuite::check_convae(seed);
    EXPECT_TRUE(r.passed()) << r.max_rel_error;
    EXPECT_GT(r.coordinates, 0u);
  }
}

TEST(ConvAeTraining, ZeroEpochsReturnInitialization) {
  auto o = toy_options();
  o.epochs = 0;
  const auto bitmaps = synthetic_bitmaps(4, 1, 12);
  const auto r = train_convae(bitmaps, o);
  EXPECT_TRUE(r.model == init_convae(o.arch, o.seed));
  ASSERT_EQ(r.loss_history.size(), 1u);
  EXPECT_EQ(r.loss_history[0], batch_loss(r.model, bitmaps));
}

TEST(ConvAeTraining, LossDecreasesAndIsSeedExact) {
  const auto bitmaps = synthetic_bitmaps(20, 6, 12);
  const auto a = train_convae(bitmaps, toy_options());
  const auto b = train_convae(bitmaps, toy_options());
  ASSERT_EQ(a.loss_history.size(), 16u);
  EXPECT_LT(a.loss_history.back(), a.loss_history.front());
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_TRUE(a.model == b.model);
  auto o = toy_options();
  o.seed = 4;
  EXPECT_NE(train_convae(bitmaps, o).loss_history, a.loss_history);
}

TEST(ConvAeTraining, RejectsBadOptions) {
  auto o = toy_options();
  EXPECT_THROW(train_convae({}, o), InvalidArgument);
  o.batch_size = 0;
  EXPECT_THROW(train_convae(synthetic_bitmaps(1, 1, 12), o), RangeError);
}

TEST(VisualTable, RowsAreEncoderOutputs) {
  const auto m = init_convae(gradsuite::toy_convae_architecture(), 2);
  const auto bitmaps = synthetic_bitmaps(6, 3, 12);
  const auto t = build_visual_table(m, bitmaps);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.dim(), 6);
  EXPECT_EQ(t.key_kind(), KeyKind::character);
  for (const auto& b : bitmaps) EXPECT_EQ(t.row(text::utf8_encode(b.ch)), encode_char(m, b));
  const auto back = FeatureTable::parse(text::split(t.serialize(), '\n'));
  const auto f = t.rounded_to_float();
  for (const auto& tok : t.tokens()) EXPECT_EQ(back.row(tok), f.row(tok));
  auto dup = bitmaps;
  dup.push_back(bitmaps[0]);
  EXPECT_THROW(build_visual_table(m, dup), InvalidArgument);
}

TEST(Pgm, RoundTripAtByteResolution) {
  const auto b = synthetic_bitmaps(1, 7, 10)[0];
  const auto back = parse_pgm(b.ch, serialize_pgm(b));
  ASSERT_EQ(back.size, 10);
  for (std::size_t i = 0; i < b.pixels.size(); ++i) EXPECT_NEAR(back.pixels[i], b.pixels[i], 0.5 / 255.0 + 1e-12);
  EXPECT_THROW(parse_pgm(1, "P5\n2 2\n255\n0 0 0 0"), ParseError);
  EXPECT_THROW(parse_pgm(1, "P2\n2 3\n255\n0 0 0 0 0 0"), ShapeError);
  EXPECT_THROW(parse_pgm(1, "P2\n2 2\n255\n0 0 0"), ParseError);
  EXPECT_THROW(parse_pgm(1, "P2\n1 1\n255\n300"), RangeError);
  EXPECT_EQ(parse_pgm(1, "P2 # comment\n1 1\n4\n2").pixels[0], 0.5);
}

TEST(Pgm, DirectoryRoundTrip) {
  const auto dir = (std::filesystem::temp_directory_path() / "disa_pgm_rt").string();
  std::filesystem::remove_all(dir);
  const auto bitmaps = synthetic_bitmaps(3, 2, 8, U'假');
  save_bitmap_dir(dir, bitmaps);
  const auto back = load_bitmap_dir(dir);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back[i].ch, bitmaps[i].ch);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_bitmap_dir(dir), IoError);
}

TEST(ConvAeFile, RoundTripsExactly) {
  const auto m = init_convae(gradsuite::toy_convae_architecture(), 11);
  const auto back = parse_convae(text::split(serialize_convae(m), '\n'));
  EXPECT_TRUE(back == m);
  EXPECT_EQ(back.arch.shape_chain(), m.arch.shape_chain());
  EXPECT_THROW(parse_convae({"#convae v0", "", "", ""}), ParseError);
}
