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


// Acceptance harness: one PASS/FAIL line per criterion, exit code 1 if any
// criterion fails. Tolerances are fixed below and are not configurable.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>

#include "disa/disa.hpp"
#include "support/cli_workflow.hpp"
#include "support/reinforce_oracle.hpp"

using namespace disa;
namespace fs = std::filesystem;

namespace {

constexpr double kGradSuiteSeconds = 60;
constexpr double kReinforceTolerance = 0.02;
constexpr double kReinforceFloor = 1e-3;
constexpr std::size_t kReinforceEpisodes = 100000;
constexpr double kReinforceSeconds = 300;
constexpr double kSyntheticP = 0.90;
constexpr double kToneCapCeiling = 0.80;
constexpr double kSignificance = 0.05;
constexpr double kLearnedOverRandom = 0.10;
constexpr int kSeeds = 10;
constexpr std::size_t kSyntheticSize = 2000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

// --- 1 ----------------------------------------------------------------------

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = gradsuite::run_all(42);
  const double secs = seconds_since(t0);
  Outcome o{secs < kGradSuiteSeconds, ""};
  double worst = 0;
  std::string failed;
  for (const auto& r : results) {
    worst = std::max(worst, r.max_rel_error);
    if (!r.passed()) failed += " " + r.name + "=" + sci(r.max_rel_error);
    o.pass = o.pass && r.passed() && r.coordinates > 0;
  }
  o.detail = std::to_string(results.size()) + " cases, worst rel err " + sci(worst) + ", " + fmt(secs, 1) + " s" +
             (failed.empty() ? "" : ", failing:" + failed);
  return o;
}

// --- 2 ----------------------------------------------------------------------

Outcome reinforce_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{true, ""};
  for (int L = 1; L <= 3; ++L) {
    const auto I = oracle::snr_instance(L);
    const auto exact = oracle::exact_policy_gradient(I.model, I.sentence, I.label);
    num::Rng rng(1000 + static_cast<std::uint64_t>(L));
    std::vector<model::Episode> eps;
    eps.reserve(kReinforceEpisodes);
    for (std::size_t i = 0; i < kReinforceEpisodes; ++i)
      eps.push_back(model::run_episode(I.model, I.sentence, I.label, {}, rng));
    const auto agree = oracle::compare(exact, model::policy_gradient(I.model, eps), kReinforceFloor);
    o.pass = o.pass && agree.compared > 0 && agree.max_rel_error <= kReinforceTolerance;
    o.detail += "L=" + std::to_string(L) + " (" + std::to_string(exact.sequences) + " seqs, " +
                std::to_string(agree.compared) + " coords) max rel err " + fmt(agree.max_rel_error) + "; ";
  }
  const double secs = seconds_since(t0);
  o.pass = o.pass && secs < kReinforceSeconds;
  o.detail += fmt(secs, 1) + " s";
  return o;
}

// --- 3, 4 -------------------------------------------------------------------

const std::vector<std::string> kSyntheticCombos{"P", "rand", "PO", "PW", "Ex0", "Ex04"};

struct SyntheticRuns {
  std::map<std::string, std::vector<double>> test_acc;
  std::vector<double> cap;  // toneless Bayes accuracy of each test split
  double secs = 0;
};

SyntheticRuns run_synthetic() {
  const auto t0 = std::chrono::steady_clock::now();
  SyntheticRuns r;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    const auto task = synth::make_synthetic_task(seed, kSyntheticSize);
    synth::FeatureOptions fo;
    fo.seed = seed;
    const auto features = synth::build_features(task, fo);
    r.cap.push_back(task.toneless_bayes_accuracy(eval::split_622(task.dataset, seed).test));
    for (const auto& combo : kSyntheticCombos) {
      eval::ExperimentConfig cfg;
      cfg.combination = combo;
      cfg.train = synth::train_config();
      cfg.seed = seed;
      r.test_acc[combo].push_back(eval::run_experiment(features, task.lexicon, task.dataset, cfg).test_acc);
    }
  }
  r.secs = seconds_since(t0);
  return r;
}

Outcome synthetic_task(const SyntheticRuns& r) {
  const double p = mean(r.test_acc.at("P")), po = mean(r.test_acc.at("PO")), cap = mean(r.cap);
  const auto ex = eval::paired_t_test(r.test_acc.at("Ex04"), r.test_acc.at("Ex0"));
  const auto pw = eval::paired_t_test(r.test_acc.at("PW"), r.test_acc.at("PO"));
  Outcome o;
  o.pass = p >= kSyntheticP && cap < kToneCapCeiling && po <= cap && ex.mean_difference >= 0 &&
           ex.p_greater < kSignificance && pw.mean_difference >= 0 && pw.p_greater < kSignificance;
  o.detail = "P " + fmt(p) + ", PO " + fmt(po) + " vs cap " + fmt(cap) + ", Ex04-Ex0 " + fmt(ex.mean_difference) +
             " (p=" + sci(ex.p_greater) + "), PW-PO " + fmt(pw.mean_difference) + " (p=" + sci(pw.p_greater) +
             "), " + std::to_string(kSeeds) + " seeds, " + fmt(r.secs, 0) + " s";
  return o;
}

Outcome learned_beats_random(const SyntheticRuns& r) {
  const auto t = eval::paired_t_test(r.test_acc.at("P"), r.test_acc.at("rand"));
  Outcome o;
  o.pass = t.mean_difference >= kLearnedOverRandom;
  o.detail = "P " + fmt(mean(r.test_acc.at("P"))) + " vs rand " + fmt(mean(r.test_acc.at("rand"))) + ", gain " +
             fmt(100 * t.mean_difference, 1) + " points over " + std::to_string(kSeeds) + " paired seeds (p=" +
             sci(t.p_greater) + ")";
  return o;
}

// --- 5 ----------------------------------------------------------------------

Outcome structural() {
  Outcome o{true, ""};
  const auto check = [&](bool ok, const std::string& what) {
    if (!ok) o.detail += "FAILED " + what + "; ";
    o.pass = o.pass && ok;
  };
  const auto lex = pinyin::Lexicon::load(DISA_DATA_DIR "/lexicon_core.tsv");
  const auto corpus = text::read_lines(DISA_DATA_DIR "/toy_corpus.txt");
  const std::vector<std::string> bases(lex.toneless_inventory().begin(), lex.toneless_inventory().end());
  const auto ex = phon::build_ex_tables(phon::synthetic_clips(bases, 42));

  // Ex0 is the mean of the five Ex04 rows; the neutral row is the mean of tones 1-4.
  bool ex_ok = ex.ex0.size() == bases.size();
  for (const auto& b : bases) {
    const auto r = [&](int t) -> const num::Vector& { return ex.ex04.row(b + std::to_string(t)); };
    ex_ok = ex_ok && r(0) == num::Vector((r(1) + r(2) + r(3) + r(4)) / 4.0) &&
            ex.ex0.row(b) == num::Vector((r(0) + r(1) + r(2) + r(3) + r(4)) / 5.0);
  }
  check(ex_ok, "Ex0 mean");

  embed::GloveOptions g;
  g.dim = 128;
  g.epochs = 20;
  const auto po = phon::build_pinyin_embeddings(lex, corpus, phon::PinyinEmbeddingMode::po, g);
  bool share = po.key_kind() == KeyKind::base;
  for (const auto& b : po.tokens())
    for (int t = 0; t < 5; ++t) share = share && phonetic_row(po, {b, t}) == &po.row(b);
  const auto po_lookup = fusion::build_fused({nullptr, &po, nullptr}, lex);
  for (char32_t ch : po_lookup.characters())
    for (int t = 1; t < 5; ++t) share = share && po_lookup.lookup(ch, t) == po_lookup.lookup(ch, 0);
  check(share, "PO tone sharing");

  const auto T = embed::train_glove(embed::build_cooccurrence(embed::tokenize_chars(corpus), 5), g)
                     .model.to_table("T", KeyKind::character);
  const auto pw = phon::build_pinyin_embeddings(lex, corpus, phon::PinyinEmbeddingMode::pw, g);
  const auto P = phon::build_p_table(ex.ex04, pw);

  const vis::ConvAeArchitecture arch;
  check(arch.shape_chain() == std::vector<int>{56, 27, 12, 5, 1}, "convAE shape chain");
  vis::ConvAeOptions copt;
  auto bitmaps = vis::synthetic_bitmaps(20, 42);
  const auto t0 = std::chrono::steady_clock::now();
  const auto cae = vis::train_convae(bitmaps, copt);
  const double cae_secs = seconds_since(t0);
  const bool decreasing = cae.loss_history.size() == 31 && cae.loss_history.back() < cae.loss_history.front();
  check(decreasing, "convAE loss decrease");
  const auto trace = vis::forward_trace(cae.model, bitmaps[0]);
  bool chain = trace.activations.size() == 6;
  for (std::size_t i = 1; i < trace.activations.size() && chain; ++i)
    chain = trace.activations[i].shape()[0] == arch.shape_chain()[i - 1];
  check(chain && trace.dense.front().size() == 512, "convAE trace");

  const auto chars = lex.characters();
  auto char_bitmaps = vis::synthetic_bitmaps(chars.size(), 7);
  for (std::size_t i = 0; i < chars.size(); ++i) char_bitmaps[i].ch = chars[i];
  const auto V = vis::build_visual_table(cae.model, char_bitmaps);
  const auto fused = fusion::build_fused({&T, &P, &V}, lex);
  check(fused.dim() == 807 && T.dim() == 128 && P.dim() == 39 + 128 && V.dim() == 512, "fused dim");
  o.detail += "fused dim " + std::to_string(fused.dim()) + " (" + std::to_string(T.dim()) + " + " +
              std::to_string(P.dim()) + " + " + std::to_string(V.dim()) + ") over " + std::to_string(fused.size()) +
              " chars, convAE chain 56-27-12-5-1, loss " + fmt(cae.loss_history.front(), 1) + " -> " +
              fmt(cae.loss_history.back(), 1) + " in " + fmt(cae_secs, 0) + " s";
  return o;
}

// --- 6 ----------------------------------------------------------------------

Outcome determinism(const SyntheticRuns& r) {
  Outcome o{true, ""};
  const auto work = (fs::temp_directory_path() / "disa_acceptance").string();
  fs::remove_all(work);
  const auto syn = work + "/syn";
  const std::vector<std::string> quick{"--phase1", "2", "--phase2", "3", "--phase3", "2", "--hidden", "16"};
  const auto with = [](std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  fs::create_directories(work + "/bitmaps");
  vis::save_bitmap_dir(work + "/bitmaps", vis::synthetic_bitmaps(4, 3));

  const std::vector<std::pair<std::string, std::vector<std::string>>> runs{
      {"syn", {"make-synthetic", "--size", "400", "--seed", "5"}},
      {"emb_t", {"train-embeddings", "--corpus", syn + "/corpus.txt", "--kind", "T", "--dim", "16", "--seed", "6"}},
      {"emb_pw",
       {"train-embeddings", "--corpus", syn + "/corpus.txt", "--kind", "PW", "--lexicon", syn + "/lexicon.tsv", "--dim",
        "16", "--seed", "7"}},
      {"audio", {"audio-features", "--clips", syn + "/clips"}},
      {"cae", {"train-convae", "--bitmaps", work + "/bitmaps", "--epochs", "2", "--seed", "8"}},
      {"rand", {"build-table", "--ex04", syn + "/Ex04.tsv", "--pw", syn + "/PW.tsv", "--kind", "rand", "--seed", "9"}},
      {"td", with({"train-disa", "--features", "P", "--data", syn + "/dataset.tsv", "--lexicon", syn + "/lexicon.tsv",
                   "--tables", syn, "--seed", "10"},
                  quick)},
      {"ev", {"evaluate", "--checkpoint", work + "/td/checkpoint.txt", "--data", syn + "/dataset.tsv", "--lexicon",
              syn + "/lexicon.tsv", "--tables", syn, "--split", "test", "--seed", "10"}},
      {"xd", with({"cross-eval", "--features", "T+P", "--source", syn + "/dataset.tsv", "--target",
                   syn + "/dataset.tsv", "--lexicon", syn + "/lexicon.tsv", "--tables", syn, "--seed", "11"},
                  quick)},
      {"ab", with({"ablate", "--data", "synthetic", "--size", "200", "--seeds", "2", "--combos", "P,rand,Ex0",
                   "--seed", "12"},
                  quick)},
      {"ov", {"overlap", "--train", syn + "/dataset.tsv", "--test", syn + "/dataset.tsv", "--lexicon", syn + "/lexicon.tsv"}},
      {"pj", {"project", "--table", syn + "/T.tsv", "--method", "tsne", "--iterations", "100", "--seed", "13"}},
  };
  std::size_t files = 0;
  for (const auto& [name, args] : runs) {
    const auto dir = work + "/" + name;
    const auto first = oracle::run_cli(with(args, {"--out", dir}));
    if (first.code != 0) {
      o.pass = false;
      o.detail += args[0] + " failed: " + first.err + "; ";
      continue;
    }
    const auto rep = oracle::replay(dir);
    if (!rep.ok) {
      o.pass = false;
      o.detail += rep.detail + "; ";
    }
    files += oracle::dir_contents(dir).size();
  }

  // Library-level rerun of one synthetic experiment against the criterion-3 record.
  const auto task = synth::make_synthetic_task(1, kSyntheticSize);
  synth::FeatureOptions fo;
  fo.seed = 1;
  const auto features = synth::build_features(task, fo);
  eval::ExperimentConfig cfg;
  cfg.combination = "P";
  cfg.train = synth::train_config();
  cfg.seed = 1;
  const bool lib = eval::run_experiment(features, task.lexicon, task.dataset, cfg).test_acc == r.test_acc.at("P")[0];
  if (!lib) o.detail += "synthetic P seed 1 rerun differs; ";
  o.pass = o.pass && lib;
  o.detail += std::to_string(runs.size()) + " commands replayed from their config logs, " + std::to_string(files) +
              " files compared byte for byte";
  fs::remove_all(work);
  return o;
}

// --- 7 ----------------------------------------------------------------------

Outcome harness_integrity() {
  Outcome o{true, ""};
  bool splits = true;
  for (std::size_t n : {5u, 17u, 400u, 2000u, 2003u})
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto s = eval::split_622(n, seed);
      std::vector<std::size_t> all;
      for (const auto* part : {&s.train, &s.dev, &s.test}) all.insert(all.end(), part->begin(), part->end());
      std::sort(all.begin(), all.end());
      std::vector<std::size_t> expect(n);
      std::iota(expect.begin(), expect.end(), 0);
      splits = splits && all == expect && s.test.size() == n / 5 && s.dev.size() == n / 5 &&
               s.train.size() == n - 2 * (n / 5);
    }
  if (!splits) o.detail += "FAILED splits; ";

  // Flipping every target label must leave model selection untouched.
  const auto src = synth::make_synthetic_task(3, 400);
  synth::FeatureOptions fo;
  fo.seed = 3;
  const auto features = synth::build_features(src, fo);
  auto target = synth::make_synthetic_task(4, 400).dataset;
  auto flipped = target;
  for (auto& s : flipped.samples) s.label = 1 - s.label;
  eval::ExperimentConfig cfg;
  cfg.combination = "T+P";
  cfg.train = synth::train_config();
  cfg.train.schedule = {2, 4, 2, 50, 0};
  cfg.seed = 3;
  const auto a = eval::cross_domain(features, src.lexicon, src.dataset, target, cfg);
  const auto b = eval::cross_domain(features, src.lexicon, src.dataset, flipped, cfg);
  bool blind = a.epoch_best == b.epoch_best && a.dev_acc == b.dev_acc && a.model == b.model &&
               a.log.size() == b.log.size() && std::abs(a.test_acc + b.test_acc - 1.0) < 1e-12;
  for (std::size_t e = 0; blind && e < a.log.size(); ++e) blind = a.log[e].dev_accuracy == b.log[e].dev_accuracy;
  if (!blind) o.detail += "FAILED target-label blindness; ";

  // Many-to-one lexicon: several characters share each base.
  pinyin::Lexicon lex;
  const char32_t first = 0x4E00;
  const std::vector<std::string> base_names{"ba", "ma", "da", "ta", "na", "la"};
  for (std::size_t b = 0; b < base_names.size(); ++b)
    for (int k = 0; k < 4; ++k) lex.add(first + static_cast<char32_t>(4 * b + k), {base_names[b], 1 + k}, 1);
  lex.finalize();
  // Train sees characters 0..k-1 of every base, test sees characters k-1..3:
  // one shared character per base, the others are new spellings of known sounds.
  const auto side = [&](int lo, int hi) {
    std::vector<std::string> lines;
    for (std::size_t b = 0; b < base_names.size(); ++b) {
      std::u32string line;
      for (int k = lo; k <= hi; ++k) line.push_back(first + static_cast<char32_t>(4 * b + static_cast<std::size_t>(k)));
      lines.push_back(text::utf8_encode(line));
    }
    return lines;
  };
  bool overlap = true;
  double worst_gap = 1;
  for (int k = 1; k <= 4; ++k) {
    const auto train = side(0, k - 1), test = side(k - 1, 3);
    const double tx = eval::token_overlap(train, test, eval::OverlapMode::textual);
    const double ph = eval::token_overlap(train, test, eval::OverlapMode::phonetic, &lex);
    worst_gap = std::min(worst_gap, ph - tx);
    overlap = overlap && ph >= tx && ph == 1.0;
  }
  if (!overlap) o.detail += "FAILED overlap; ";
  o.pass = splits && blind && overlap;
  o.detail += "splits 6:2:2 disjoint and exhaustive (50 cases), cross-domain selection identical under flipped target "
              "labels (best epoch " +
              std::to_string(a.epoch_best) + "), phonetic - textual overlap >= " + fmt(worst_gap) + " on 4 constructed corpus pairs";
  return o;
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;
  std::optional<SyntheticRuns> synthetic;
  const auto runs = [&]() -> const SyntheticRuns& {
    if (!synthetic) synthetic = run_synthetic();
    return *synthetic;
  };
  criteria.emplace_back("gradient suite", gradient_suite);
  criteria.emplace_back("REINFORCE oracle", reinforce_oracle);
  criteria.emplace_back("synthetic task", [&] { return synthetic_task(runs()); });
  criteria.emplace_back("learned P beats random P", [&] { return learned_beats_random(runs()); });
  criteria.emplace_back("structural checks", structural);
  criteria.emplace_back("determinism", [&] { return determinism(runs()); });
  criteria.emplace_back("harness integrity", harness_integrity);

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
