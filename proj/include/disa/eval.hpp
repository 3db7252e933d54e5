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


#ifndef DISA_EVAL_HPP
#define DISA_EVAL_HPP

// Labeled datasets, 6:2:2 splits, feature combinations, in-domain and
// cross-domain experiments, token overlap and paired significance tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "disa/feature_table.hpp"
#include "disa/fusion.hpp"
#include "disa/phonetics.hpp"
#include "disa/training.hpp"

namespace disa::eval {

struct LabeledDataset {
  std::string name;
  std::vector<train::Sample> samples;
  int classes = 2;
};

/// UTF-8 TSV `label<TAB>text`. `classes` = 0 infers max label + 1 (at least 2).
inline LabeledDataset parse_dataset(const std::vector<std::string>& lines, std::string name, int classes = 0) {
  LabeledDataset ds;
  ds.name = std::move(name);
  int max_label = -1;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (text::trim(lines[n]).empty()) continue;
    const auto tab = lines[n].find('\t');
    if (tab == std::string::npos) throw ParseError("line " + std::to_string(n + 1) + ": expected label<TAB>text", 0, n + 1);
    long long label = 0;
    try {
      label = text::parse_int(std::string_view(lines[n]).substr(0, tab));
    } catch (const ParseError&) {
      throw ParseError("line " + std::to_string(n + 1) + ": malformed label", 0, n + 1);
    }
    if (label < 0) throw RangeError("line " + std::to_string(n + 1) + ": negative label");
    if (classes > 0 && label >= classes)
      throw RangeError("line " + std::to_string(n + 1) + ": label " + std::to_string(label) + " outside [0," +
                       std::to_string(classes) + ")");
    std::string body(text::trim(std::string_view(lines[n]).substr(tab + 1)));
    if (body.empty()) throw ParseError("line " + std::to_string(n + 1) + ": empty text", tab + 1, n + 1);
    try {
      text::utf8_decode(body);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(n + 1) + ": " + e.what(), tab + 1 + e.offset(), n + 1);
    }
    max_label = std::max(max_label, static_cast<int>(label));
    ds.samples.push_back({std::move(body), static_cast<int>(label)});
  }
  if (ds.samples.empty()) throw InvalidArgument("dataset '" + ds.name + "' has no samples");
  ds.classes = classes > 0 ? classes : std::max(2, max_label + 1);
  return ds;
}

inline LabeledDataset load_dataset(const std::string& path, int classes = 0) {
  return parse_dataset(text::read_lines(path), std::filesystem::path(path).stem().string(), classes);
}

inline std::string serialize_dataset(const LabeledDataset& ds) {
  std::string out;
  for (const auto& s : ds.samples) out += std::to_string(s.label) + "\t" + s.text + "\n";
  return out;
}

struct SplitSpec {
  std::vector<std::size_t> train, dev, test;
  std::uint64_t seed = 0;
};

/// Seeded shuffle, then test and dev get floor(n/5) each and train the rest.
inline SplitSpec split_622(std::size_t n, std::uint64_t seed) {
  if (n < 5) throw InvalidArgument("a 6:2:2 split needs at least 5 samples");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  num::Rng rng(seed);
  num::shuffle(idx, rng);
  const std::size_t k = n / 5;
  SplitSpec s;
  s.seed = seed;
  s.train.assign(idx.begin(), idx.end() - static_cast<std::ptrdiff_t>(2 * k));
  s.dev.assign(idx.end() - static_cast<std::ptrdiff_t>(2 * k), idx.end() - static_cast<std::ptrdiff_t>(k));
  s.test.assign(idx.end() - static_cast<std::ptrdiff_t>(k), idx.end());
  return s;
}

inline SplitSpec split_622(const LabeledDataset& ds, std::uint64_t seed) { return split_622(ds.samples.size(), seed); }

inline std::vector<train::Sample> select(const LabeledDataset& ds, const std::vector<std::size_t>& idx) {
  std::vector<train::Sample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(ds.samples.at(i));
  return out;
}

// --- feature combinations ---------------------------------------------------

inline const std::vector<std::string>& combinations() {
  static const std::vector<std::string> all{"T",   "P",    "V",  "T+P",    "T+V",    "P+V",     "T+P+V",   "Ex0",
                                            "Ex04", "PO",  "PW", "Ex0+PO", "Ex0+PW", "Ex04+PO", "Ex04+PW", "rand"};
  return all;
}

/// The phonetic-variant rows of the ablation (Ex0 ... Ex04+PW).
inline const std::vector<std::string>& phonetic_combinations() {
  static const std::vector<std::string> rows{"Ex0", "Ex04", "PO", "PW", "Ex0+PO", "Ex0+PW", "Ex04+PO", "Ex04+PW"};
  return rows;
}

inline void check_combination(std::string_view name) {
  const auto& all = combinations();
  if (std::find(all.begin(), all.end(), name) == all.end())
    throw InvalidArgument("unknown feature combination '" + std::string(name) + "'; valid: " + text::join(all, ", "));
}

/// Every table an experiment may draw from; absent members are simply
/// unavailable to combinations that need them.
struct FeatureSet {
  std::optional<FeatureTable> T, V;
  std::optional<PhoneticTable> Ex0, Ex04, PO, PW;
};

inline const FeatureTable& need(const std::optional<FeatureTable>& t, const char* name) {
  if (!t) throw InvalidArgument(std::string("feature table ") + name + " is not available");
  return *t;
}

/// Fused lookup for a combination. "P" is Ex04+PW; "rand" replaces P with a
/// random table of the same keys and width drawn from `rand_seed`.
inline fusion::FusedLookup build_lookup(const FeatureSet& fs, const std::string& combo, const pinyin::Lexicon& lex,
                                        std::uint64_t rand_seed = 0, std::vector<std::string>* missing = nullptr) {
  check_combination(combo);
  const auto parts = text::split(combo, '+');
  const auto has = [&](std::string_view p) { return std::find(parts.begin(), parts.end(), p) != parts.end(); };
  fusion::FusionInputs in;
  if (has("T")) in.textual = &need(fs.T, "T");
  if (has("V")) in.visual = &need(fs.V, "V");
  std::optional<PhoneticTable> p;
  if (has("P") || has("rand")) {
    p = phon::build_p_table(need(fs.Ex04, "Ex04"), need(fs.PW, "PW"));
    if (has("rand")) p = fusion::random_table(*p, rand_seed);
  } else {
    std::vector<const PhoneticTable*> pp;
    if (has("Ex0")) pp.push_back(&need(fs.Ex0, "Ex0"));
    if (has("Ex04")) pp.push_back(&need(fs.Ex04, "Ex04"));
    if (has("PO")) pp.push_back(&need(fs.PO, "PO"));
    if (has("PW")) pp.push_back(&need(fs.PW, "PW"));
    if (pp.size() == 1) p = *pp.front();
    else if (!pp.empty()) p = phon::concat_tables(combo, pp);
  }
  if (p) in.phonetic = &*p;
  return fusion::build_fused(in, lex, missing);
}

// --- metrics ----------------------------------------------------------------

struct ConfusionMatrix {
  int classes = 2;
  std::vector<std::size_t> counts;  // row = truth, column = prediction

  explicit ConfusionMatrix(int x) : classes(x), counts(static_cast<std::size_t>(x * x), 0) {}
  void add(int truth, int pred) { ++counts[static_cast<std::size_t>(truth * classes + pred)]; }
  std::size_t at(int truth, int pred) const { return counts[static_cast<std::size_t>(truth * classes + pred)]; }
  std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
  double accuracy() const {
    std::size_t diag = 0;
    for (int k = 0; k < classes; ++k) diag += at(k, k);
    return total() ? static_cast<double>(diag) / static_cast<double>(total()) : 0.0;
  }
};

inline ConfusionMatrix confusion(const model::DisaModel& m, const std::vector<train::EncodedSample>& data,
                                 bool use_policy) {
  ConfusionMatrix cm(m.classes());
  for (const auto& s : data) cm.add(s.label, train::predict_encoded(m, s.sentence, use_policy).label);
  return cm;
}

struct PairedTTest {
  double mean_difference = 0;
  double t = 0;
  int df = 0;
  double p_two_sided = 1;
  double p_greater = 1;  // H1: mean(a - b) > 0
};

inline PairedTTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("paired t-test needs two equal samples of size >= 2");
  const auto n = static_cast<double>(a.size());
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1));
  PairedTTest r;
  r.mean_difference = mean;
  r.df = static_cast<int>(a.size()) - 1;
  if (sd == 0) {
    r.t = mean == 0 ? 0 : std::copysign(std::numeric_limits<double>::infinity(), mean);
    r.p_two_sided = mean == 0 ? 1.0 : 0.0;
    r.p_greater = mean > 0 ? 0.0 : 1.0;
    return r;
  }
  r.t = mean / (sd / std::sqrt(n));
  boost::math::students_t dist(r.df);
  r.p_greater = boost::math::cdf(boost::math::complement(dist, r.t));
  r.p_two_sided = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

// --- experiments ---------------------------------------------------------------

struct ExperimentReport {
  std::string config;
  std::string dataset;
  int epoch_best = 0;
  double dev_acc = 0;
  double test_acc = 0;
  std::vector<train::EpochRecord> log;
  std::vector<double> test_by_epoch;
  bool used_policy = false;
  model::DisaModel model;  // best-dev checkpoint
};

inline std::string metrics_header() { return "config\tdataset\tepoch_best\tdev_acc\ttest_acc\n"; }

inline std::string metrics_row(const ExperimentReport& r) {
  return r.config + "\t" + r.dataset + "\t" + std::to_string(r.epoch_best) + "\t" + text::format_real(r.dev_acc) +
         "\t" + text::format_real(r.test_acc) + "\n";
}

struct ExperimentConfig {
  std::string combination = "T+P";
  train::TrainConfig train;
  std::uint64_t seed = 42;  // drives split, initialization, training and rand features
};

/// Trains on the source train split, selects the epoch by source dev
/// accuracy and reports target test accuracy at that epoch. The trainer only
/// ever receives train and dev data; target test scores are taken from the
/// per-epoch callback and looked up after selection.
inline ExperimentReport cross_domain(const FeatureSet& fs, const pinyin::Lexicon& lex, const LabeledDataset& source,
                                     const LabeledDataset& target, const ExperimentConfig& cfg) {
  if (source.classes != target.classes)
    throw InvalidArgument("class counts differ: " + std::to_string(source.classes) + " vs " +
                          std::to_string(target.classes));
  const auto lookup = build_lookup(fs, cfg.combination, lex, train::derive_seed(cfg.seed, 5));
  const auto split_a = split_622(source, cfg.seed);
  const auto split_b = split_622(target, cfg.seed);
  const auto train_set = train::encode_samples(lookup, lex, select(source, split_a.train));
  const auto dev_set = train::encode_samples(lookup, lex, select(source, split_a.dev));
  const auto test_set = train::encode_samples(lookup, lex, select(target, split_b.test));

  auto tc = cfg.train;
  tc.schedule.seed = cfg.seed;
  auto m = model::init_model(lookup.dim(), tc.hidden, source.classes, train::derive_seed(cfg.seed, 1));
  ExperimentReport rep;
  rep.config = cfg.combination;
  rep.dataset = source.name == target.name ? source.name : source.name + "->" + target.name;
  const bool policy = lookup.has_phonetic();
  const auto res = train::train_three_phase(std::move(m), lookup, train_set, dev_set, tc,
                                            [&](const train::EpochRecord&, const model::DisaModel& cur) {
                                              rep.test_by_epoch.push_back(train::accuracy(cur, test_set, policy));
                                            });
  rep.epoch_best = res.best_epoch;
  rep.dev_acc = res.best_dev_accuracy;
  rep.test_acc = res.best_epoch > 0 ? rep.test_by_epoch[static_cast<std::size_t>(res.best_epoch - 1)]
                                    : train::accuracy(res.model, test_set, policy);
  rep.log = res.log;
  rep.used_policy = res.used_policy;
  rep.model = res.model;
  return rep;
}

/// In-domain run: the source and target are the same dataset.
inline ExperimentReport run_experiment(const FeatureSet& fs, const pinyin::Lexicon& lex, const LabeledDataset& ds,
                                       const ExperimentConfig& cfg) {
  return cross_domain(fs, lex, ds, ds, cfg);
}

// --- token overlap ----------------------------------------------------------------

enum class OverlapMode { textual, phonetic };

inline std::set<std::string> token_types(const std::vector<std::string>& texts, OverlapMode mode,
                                         const pinyin::Lexicon* lex) {
  std::set<std::string> out;
  for (const auto& t : texts) {
    const auto cps = text::utf8_decode(t);
    if (mode == OverlapMode::textual) {
      for (char32_t cp : cps)
        if (!text::is_space(cp)) out.insert(text::utf8_encode(cp));
    } else {
      if (!lex) throw InvalidArgument("phonetic overlap needs a lexicon");
      for (const auto& r : pinyin::read_line(*lex, cps, pinyin::UnknownPolicy::skip)) out.insert(r.syllable.base);
    }
  }
  return out;
}

/// Share of test token types (characters, or toneless bases) seen in train.
inline double token_overlap(const std::vector<std::string>& train_texts, const std::vector<std::string>& test_texts,
                            OverlapMode mode, const pinyin::Lexicon* lex = nullptr) {
  if (train_texts.empty() || test_texts.empty()) throw InvalidArgument("token_overlap needs non-empty sets");
  const auto a = token_types(train_texts, mode, lex);
  const auto b = token_types(test_texts, mode, lex);
  if (b.empty()) return 0.0;
  std::size_t seen = 0;
  for (const auto& t : b) seen += a.count(t);
  return static_cast<double>(seen) / static_cast<double>(b.size());
}

}  // namespace disa::eval

#endif  // DISA_EVAL_HPP
