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


#ifndef DISA_CLI_HPP
#define DISA_CLI_HPP

// Command-line surface: argument and config-file parsing, option
// validation, and one handler per verb. Handlers compute everything first
// and write outputs last; a failed command removes whatever it wrote.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "disa/embeddings.hpp"
#include "disa/eval.hpp"
#include "disa/gradient_suite.hpp"
#include "disa/numerics/projection.hpp"
#include "disa/phonetics.hpp"
#include "disa/synthetic.hpp"
#include "disa/visual.hpp"

namespace disa::cli {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Command {
  std::string verb;
  std::map<std::string, std::string> options;

  friend bool operator==(const Command&, const Command&) = default;
};

enum class OptionType { text, integer, real, flag, combination, combination_list, choice };

struct OptionSpec {
  std::string name;
  OptionType type = OptionType::text;
  std::vector<std::string> choices;  // for OptionType::choice

  OptionSpec(std::string n, OptionType t = OptionType::text, std::vector<std::string> c = {})
      : name(std::move(n)), type(t), choices(std::move(c)) {}
};

struct VerbSpec {
  std::string name;
  std::string summary;
  std::vector<std::string> required;
  std::vector<OptionSpec> options;  // every accepted option, required ones included
  bool writes = true;               // needs --out
};

namespace detail {

using T = OptionType;

inline std::vector<OptionSpec> training_options() {
  return {{"phase1", T::integer},       {"phase2", T::integer},       {"phase3", T::integer},
          {"batch", T::integer},        {"hidden", T::integer},       {"critic-lr", T::real},
          {"policy-lr", T::real},       {"l2", T::real},              {"dropout", T::real},
          {"reward-baseline", T::flag}, {"uniform-exploration", T::flag}};
}

inline std::vector<OptionSpec> table_options() {
  return {{"tables", T::text}, {"text-table", T::text}, {"visual-table", T::text}, {"ex0", T::text},
          {"ex04", T::text},   {"po", T::text},         {"pw", T::text}};
}

inline std::vector<OptionSpec> join(std::vector<OptionSpec> a, const std::vector<OptionSpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace detail

inline const std::vector<VerbSpec>& verbs() {
  using detail::join;
  using detail::T;
  static const std::vector<VerbSpec> all{
      {"convert",
       "convert a character corpus to pinyin token lines",
       {"lexicon", "input"},
       {{"lexicon", T::text},
        {"input", T::text},
        {"mode", T::choice, {"toneless", "toned"}},
        {"unknown", T::choice, {"skip", "error", "unk"}}}},
      {"audio-features", "reduce acoustic clip matrices to Ex04 and Ex0 tables", {"clips"}, {{"clips", T::text}}},
      {"train-embeddings",
       "train GloVe embeddings (T over characters, PO/PW over pinyin)",
       {"corpus", "kind"},
       {{"corpus", T::text},
        {"kind", T::choice, {"T", "PO", "PW"}},
        {"lexicon", T::text},
        {"dim", T::integer},
        {"epochs", T::integer},
        {"window", T::integer},
        {"min-count", T::integer},
        {"x-max", T::real},
        {"lr", T::real}}},
      {"train-convae",
       "train the convolutional autoencoder and export V features",
       {"bitmaps"},
       {{"bitmaps", T::text}, {"epochs", T::integer}, {"batch", T::integer}, {"lr", T::real}}},
      {"build-table",
       "build the P table (Ex04 + PW) or its random counterpart",
       {"ex04", "pw"},
       {{"ex04", T::text}, {"pw", T::text}, {"kind", T::choice, {"P", "rand"}}}},
      {"train-disa",
       "train DISA on a dataset and keep the best-dev checkpoint",
       {"features", "data", "lexicon"},
       join(join({{"features", T::combination}, {"data", T::text}, {"lexicon", T::text}}, detail::table_options()),
            detail::training_options())},
      {"evaluate",
       "score a checkpoint on a dataset",
       {"checkpoint", "data", "lexicon"},
       join({{"checkpoint", T::text},
             {"data", T::text},
             {"lexicon", T::text},
             {"features", T::combination},
             {"split", T::choice, {"all", "test"}}},
            detail::table_options())},
      {"cross-eval",
       "train on a source dataset, report target test accuracy",
       {"features", "source", "target", "lexicon"},
       join(join({{"features", T::combination}, {"source", T::text}, {"target", T::text}, {"lexicon", T::text}},
                 detail::table_options()),
            detail::training_options())},
      {"ablate",
       "one metrics row per feature combination and seed",
       {"data"},
       join(join({{"data", T::text},
                  {"lexicon", T::text},
                  {"combos", T::combination_list},
                  {"size", T::integer},
                  {"seeds", T::integer}},
                 detail::table_options()),
            detail::training_options())},
      {"overlap",
       "textual and phonetic token overlap of a test set with a train set",
       {"train", "test", "lexicon"},
       {{"train", T::text}, {"test", T::text}, {"lexicon", T::text}}},
      {"project",
       "2-D coordinates of a feature table for plotting",
       {"table"},
       {{"table", T::text},
        {"method", T::choice, {"pca", "tsne"}},
        {"perplexity", T::real},
        {"iterations", T::integer},
        {"limit", T::integer}}},
      {"grad-check", "finite-difference check of every backward pass", {}, {}, false},
      {"make-synthetic",
       "generate the synthetic tone task with its tables",
       {},
       {{"size", T::integer}, {"with-tables", T::flag}}},
  };
  return all;
}

inline const VerbSpec* find_verb(std::string_view name) {
  for (const auto& v : verbs())
    if (v.name == name) return &v;
  return nullptr;
}

inline std::string usage() {
  std::string s = "usage: disa <verb> [--option value ...] [--config file] [--seed n] [--out dir]\n\nverbs:\n";
  for (const auto& v : verbs()) {
    s += "  " + v.name + std::string(v.name.size() < 18 ? 18 - v.name.size() : 1, ' ') + v.summary + "\n";
    if (!v.options.empty()) {
      std::vector<std::string> names;
      for (const auto& o : v.options) {
        const bool req = std::find(v.required.begin(), v.required.end(), o.name) != v.required.end();
        names.push_back(req ? "--" + o.name : "[--" + o.name + "]");
      }
      s += "      " + text::join(names, " ") + "\n";
    }
  }
  s += "\n--out defaults to $DISA_OUT. Config files hold key=value lines; flags override them.\n";
  return s;
}

namespace detail {

inline const OptionSpec* find_option(const VerbSpec& v, std::string_view key) {
  static const std::vector<OptionSpec> common{{"seed", T::integer}, {"out", T::text}};
  for (const auto& o : v.options)
    if (o.name == key) return &o;
  for (const auto& o : common)
    if (o.name == key && (o.name != "out" || v.writes)) return &o;
  return nullptr;
}

inline bool parse_flag(std::string_view v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw UsageError("expected a boolean (0/1/true/false), got '" + std::string(v) + "'");
}

inline void validate_value(const OptionSpec& o, const std::string& value) {
  const auto fail = [&](const std::string& why) { throw UsageError("--" + o.name + ": " + why); };
  try {
    switch (o.type) {
      case T::text:
        if (value.empty()) fail("empty value");
        break;
      case T::integer:
        text::parse_int(value);
        break;
      case T::real:
        text::parse_real(value);
        break;
      case T::flag:
        parse_flag(value);
        break;
      case T::combination:
        eval::check_combination(value);
        break;
      case T::combination_list:
        for (const auto& c : text::split(value, ',')) eval::check_combination(c);
        break;
      case T::choice:
        if (std::find(o.choices.begin(), o.choices.end(), value) == o.choices.end())
          fail("'" + value + "' is not one of " + text::join(o.choices, ", "));
        break;
    }
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    fail(e.what());
  }
}

inline void set_option(const VerbSpec& v, std::map<std::string, std::string>& into, const std::string& key,
                       const std::string& value, const std::string& where) {
  const OptionSpec* o = find_option(v, key);
  if (!o) throw UsageError(where + "unknown option --" + key + " for '" + v.name + "'");
  validate_value(*o, value);
  into[key] = value;
}

}  // namespace detail

/// Parses `verb --key value ...` (program name excluded). `--key=value` is
/// accepted too, and a boolean option given bare means true. `default_out`
/// stands in for $DISA_OUT.
inline Command parse_args(const std::vector<std::string>& args, const std::optional<std::string>& default_out) {
  if (args.empty()) throw UsageError("missing verb");
  Command cmd;
  cmd.verb = args[0];
  if (cmd.verb == "help" || cmd.verb == "--help" || cmd.verb == "-h") {
    cmd.verb = "help";
    return cmd;
  }
  const VerbSpec* v = find_verb(cmd.verb);
  if (!v) throw UsageError("unknown verb '" + cmd.verb + "'");

  std::map<std::string, std::string> flags;
  std::optional<std::string> config;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.size() < 3 || a.rfind("--", 0) != 0) throw UsageError("expected --option, got '" + a + "'");
    std::string key = a.substr(2), value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else if (const auto* o = detail::find_option(*v, key);
               o && o->type == OptionType::flag && (i + 1 >= args.size() || args[i + 1].rfind("--", 0) == 0)) {
      value = "1";  // bare boolean flag
    } else {
      if (i + 1 >= args.size()) throw UsageError("option --" + key + " needs a value");
      value = args[++i];
    }
    if (key == "config") {
      if (config) throw UsageError("--config given twice");
      config = value;
      continue;
    }
    if (flags.count(key)) throw UsageError("option --" + key + " given twice");
    detail::set_option(*v, flags, key, value, "");
  }

  if (config) {
    std::vector<std::string> lines;
    try {
      lines = text::read_lines(*config);
    } catch (const Error& e) {
      throw UsageError(std::string("cannot read config: ") + e.what());
    }
    for (std::size_t n = 0; n < lines.size(); ++n) {
      const auto line = text::trim(lines[n]);
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find('=');
      const std::string where = *config + ":" + std::to_string(n + 1) + ": ";
      if (eq == std::string_view::npos) throw UsageError(where + "expected key=value");
      const std::string key(text::trim(line.substr(0, eq)));
      const std::string value(text::trim(line.substr(eq + 1)));
      if (key == "config") throw UsageError(where + "config files cannot include other config files");
      detail::set_option(*v, cmd.options, key, value, where);
    }
  }
  for (auto& [k, val] : flags) cmd.options[k] = val;
  cmd.options.try_emplace("seed", "42");
  if (v->writes && !cmd.options.count("out") && default_out && !default_out->empty())
    cmd.options["out"] = *default_out;

  for (const auto& r : v->required)
    if (!cmd.options.count(r)) throw UsageError("'" + v->name + "' needs --" + r);
  if (v->writes && !cmd.options.count("out")) throw UsageError("'" + v->name + "' needs --out (or $DISA_OUT)");
  return cmd;
}

inline Command parse_args(const std::vector<std::string>& args) {
  const char* env = std::getenv("DISA_OUT");
  return parse_args(args, env ? std::optional<std::string>(env) : std::nullopt);
}

inline Command parse_args(int argc, const char* const* argv) {
  return parse_args(std::vector<std::string>(argv + (argc > 0 ? 1 : 0), argv + argc));
}

/// Files under one output directory. `rollback` deletes every file written
/// and every directory created through it.
class OutputDir {
 public:
  explicit OutputDir(std::string root) : root_(std::move(root)) {}

  std::string path(const std::string& name) const { return (std::filesystem::path(root_) / name).string(); }

  void write(const std::string& name, std::string_view content) {
    const std::filesystem::path p(path(name));
    make_dirs(p.parent_path());
    written_.push_back(p);
    text::write_text(p.string(), content);
  }

  void rollback() noexcept {
    std::error_code ec;
    for (auto it = written_.rbegin(); it != written_.rend(); ++it) std::filesystem::remove(*it, ec);
    for (auto it = created_.rbegin(); it != created_.rend(); ++it) std::filesystem::remove(*it, ec);
    written_.clear();
    created_.clear();
  }

  const std::vector<std::filesystem::path>& written() const noexcept { return written_; }

 private:
  void make_dirs(const std::filesystem::path& dir) {
    if (dir.empty() || std::filesystem::exists(dir)) return;
    make_dirs(dir.parent_path());
    std::filesystem::create_directory(dir);
    created_.push_back(dir);
  }

  std::string root_;
  std::vector<std::filesystem::path> written_;
  std::vector<std::filesystem::path> created_;
};

namespace detail {

/// Typed access to a parsed command's options.
class Options {
 public:
  explicit Options(const Command& c) : c_(c) {}

  bool has(const std::string& k) const { return c_.options.count(k) != 0; }
  const std::string& str(const std::string& k) const {
    auto it = c_.options.find(k);
    if (it == c_.options.end()) throw UsageError("missing --" + k);
    return it->second;
  }
  std::string str(const std::string& k, const std::string& dflt) const { return has(k) ? str(k) : dflt; }
  long long integer(const std::string& k, long long dflt) const { return has(k) ? text::parse_int(str(k)) : dflt; }
  double real(const std::string& k, double dflt) const { return has(k) ? text::parse_real(str(k)) : dflt; }
  bool flag(const std::string& k, bool dflt) const { return has(k) ? parse_flag(str(k)) : dflt; }
  std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("seed", 42)); }

 private:
  const Command& c_;
};

inline int positive(long long v, const char* what) {
  if (v < 1) throw RangeError(std::string(what) + " must be >= 1");
  return static_cast<int>(v);
}

inline train::TrainConfig training_config(const Options& o, train::TrainConfig cfg = {}) {
  auto& s = cfg.schedule;
  s.phase1 = static_cast<int>(o.integer("phase1", s.phase1));
  s.phase2 = static_cast<int>(o.integer("phase2", s.phase2));
  s.phase3 = static_cast<int>(o.integer("phase3", s.phase3));
  s.batch_size = positive(o.integer("batch", s.batch_size), "batch");
  s.seed = o.seed();
  cfg.hidden = positive(o.integer("hidden", cfg.hidden), "hidden");
  cfg.critic_lr = o.real("critic-lr", cfg.critic_lr);
  cfg.policy_lr = o.real("policy-lr", cfg.policy_lr);
  cfg.l2 = o.real("l2", cfg.l2);
  cfg.dropout = o.real("dropout", cfg.dropout);
  if (cfg.dropout < 0 || cfg.dropout >= 1) throw RangeError("dropout must lie in [0, 1)");
  cfg.reward_baseline = o.flag("reward-baseline", cfg.reward_baseline);
  cfg.uniform_exploration = o.flag("uniform-exploration", cfg.uniform_exploration);
  return cfg;
}

inline std::set<std::string> tables_needed(const std::vector<std::string>& combos) {
  std::set<std::string> need;
  for (const auto& c : combos)
    for (const auto& p : text::split(c, '+')) {
      if (p == "P" || p == "rand") {
        need.insert("Ex04");
        need.insert("PW");
      } else {
        need.insert(p);
      }
    }
  return need;
}

/// Loads the tables the combinations use, from explicit paths or from
/// `<tables>/<name>.tsv`.
inline eval::FeatureSet load_tables(const Options& o, const std::vector<std::string>& combos) {
  static const std::map<std::string, std::string> flag_of{{"T", "text-table"}, {"V", "visual-table"},
                                                          {"Ex0", "ex0"},      {"Ex04", "ex04"},
                                                          {"PO", "po"},        {"PW", "pw"}};
  eval::FeatureSet fs;
  for (const auto& name : tables_needed(combos)) {
    std::string path;
    if (o.has(flag_of.at(name))) {
      path = o.str(flag_of.at(name));
    } else if (o.has("tables")) {
      path = (std::filesystem::path(o.str("tables")) / (name + ".tsv")).string();
    } else {
      throw UsageError("combination needs the " + name + " table: pass --" + flag_of.at(name) + " or --tables");
    }
    auto t = FeatureTable::load(path);
    if (name == "T") fs.T = std::move(t);
    else if (name == "V") fs.V = std::move(t);
    else if (name == "Ex0") fs.Ex0 = std::move(t);
    else if (name == "Ex04") fs.Ex04 = std::move(t);
    else if (name == "PO") fs.PO = std::move(t);
    else fs.PW = std::move(t);
  }
  return fs;
}

/// Effective configuration as key=value lines, loadable with --config.
inline std::string config_log(const Command& c) {
  std::string s = "# disa " + c.verb + "\n";
  for (const auto& [k, v] : c.options)
    if (k != "out") s += k + "=" + v + "\n";
  return s;
}

inline std::string epoch_log(const eval::ExperimentReport& r) {
  std::string s = "epoch\tphase\tcritic_loss\tmean_reward\tdev_acc\ttest_acc\n";
  for (std::size_t k = 0; k < r.log.size(); ++k) {
    const auto& e = r.log[k];
    s += std::to_string(e.epoch) + "\t" + std::to_string(e.phase) + "\t" + text::format_real(e.critic_loss) + "\t" +
         text::format_real(e.mean_reward) + "\t" + text::format_real(e.dev_accuracy) + "\t" +
         text::format_real(r.test_by_epoch.at(k)) + "\n";
  }
  return s;
}

inline std::string point_table(const std::vector<std::string>& tokens, const std::vector<num::Point2>& pts) {
  std::string s = "token\tx\ty\n";
  for (std::size_t i = 0; i < tokens.size(); ++i)
    s += tokens[i] + "\t" + text::format_real(pts[i].first) + "\t" + text::format_real(pts[i].second) + "\n";
  return s;
}

// --- verb handlers. Each takes the options and the output directory. ---------

inline void run_convert(const Options& o, OutputDir& out, std::ostream& log) {
  const auto lex = pinyin::Lexicon::load(o.str("lexicon"));
  const auto mode = o.str("mode", "toneless") == "toned" ? pinyin::ConversionMode::toned
                                                         : pinyin::ConversionMode::toneless;
  pinyin::ConversionStats stats;
  const auto lines = pinyin::convert_corpus(lex, text::read_lines(o.str("input")), mode,
                                            pinyin::parse_unknown_policy(o.str("unknown", "skip")), &stats);
  out.write("converted.txt", text::join(lines, "\n") + (lines.empty() ? "" : "\n"));
  log << "recognized " << stats.recognized << ", skipped " << stats.skipped << ", unknown " << stats.unknown_tokens
      << "\n";
}

inline void run_audio_features(const Options& o, OutputDir& out, std::ostream& log) {
  const auto clips = phon::load_clip_dir(o.str("clips"));
  if (clips.empty()) throw InvalidArgument("no .csv clips in '" + o.str("clips") + "'");
  const auto ex = phon::build_ex_tables(clips);
  out.write("Ex04.tsv", ex.ex04.serialize());
  out.write("Ex0.tsv", ex.ex0.serialize());
  log << clips.size() << " clips, " << ex.ex0.size() << " bases\n";
}

inline void run_train_embeddings(const Options& o, OutputDir& out, std::ostream& log) {
  const std::string kind = o.str("kind");
  embed::GloveOptions g;
  g.dim = positive(o.integer("dim", g.dim), "dim");
  g.epochs = static_cast<int>(o.integer("epochs", g.epochs));
  g.x_max = o.real("x-max", g.x_max);
  g.learning_rate = o.real("lr", g.learning_rate);
  g.seed = o.seed();
  const int window = positive(o.integer("window", 5), "window");
  const int min_count = positive(o.integer("min-count", 1), "min-count");
  if (kind != "T" && !o.has("lexicon")) throw UsageError("--kind " + kind + " needs --lexicon");
  const auto corpus = text::read_lines(o.str("corpus"));
  FeatureTable table;
  if (kind == "T") {
    const auto X = embed::build_cooccurrence(embed::tokenize_chars(corpus), window, min_count);
    const auto r = embed::train_glove(X, g);
    table = r.model.to_table("T", KeyKind::character);
    log << "final loss " << text::format_real(r.loss_history.back()) << "\n";
  } else {
    const auto lex = pinyin::Lexicon::load(o.str("lexicon"));
    table = phon::build_pinyin_embeddings(
        lex, corpus, kind == "PO" ? phon::PinyinEmbeddingMode::po : phon::PinyinEmbeddingMode::pw, g, window,
        min_count);
  }
  out.write(kind + ".tsv", table.serialize());
  log << table.size() << " rows of width " << table.dim() << "\n";
}

inline void run_train_convae(const Options& o, OutputDir& out, std::ostream& log) {
  vis::ConvAeOptions opt;
  opt.epochs = static_cast<int>(o.integer("epochs", opt.epochs));
  opt.batch_size = positive(o.integer("batch", opt.batch_size), "batch");
  opt.learning_rate = o.real("lr", opt.learning_rate);
  opt.seed = o.seed();
  const auto bitmaps = vis::load_bitmap_dir(o.str("bitmaps"));
  const auto r = vis::train_convae(bitmaps, opt);
  std::string loss = "epoch\tloss\n";
  for (std::size_t e = 0; e < r.loss_history.size(); ++e)
    loss += std::to_string(e) + "\t" + text::format_real(r.loss_history[e]) + "\n";
  const auto V = vis::build_visual_table(r.model, bitmaps);
  out.write("convae.model", vis::serialize_convae(r.model));
  out.write("V.tsv", V.serialize());
  out.write("loss.tsv", loss);
  log << bitmaps.size() << " bitmaps, loss " << text::format_real(r.loss_history.front()) << " -> "
      << text::format_real(r.loss_history.back()) << "\n";
}

inline void run_build_table(const Options& o, OutputDir& out, std::ostream& log) {
  const auto P = phon::build_p_table(FeatureTable::load(o.str("ex04")), FeatureTable::load(o.str("pw")));
  if (o.str("kind", "P") == "rand") {
    const auto R = fusion::random_table(P, o.seed());
    out.write("rand.tsv", R.serialize());
  } else {
    out.write("P.tsv", P.serialize());
  }
  log << P.size() << " rows of width " << P.dim() << "\n";
}

inline std::string report_line(const eval::ExperimentReport& r) {
  return r.config + " on " + r.dataset + ": best epoch " + std::to_string(r.epoch_best) + ", dev " +
         text::format_real(r.dev_acc) + ", test " + text::format_real(r.test_acc) + "\n";
}

inline void run_train_disa(const Options& o, OutputDir& out, std::ostream& log) {
  eval::ExperimentConfig cfg;
  cfg.combination = o.str("features");
  cfg.seed = o.seed();
  cfg.train = training_config(o);
  const auto fs = load_tables(o, {cfg.combination});
  const auto lex = pinyin::Lexicon::load(o.str("lexicon"));
  const auto ds = eval::load_dataset(o.str("data"));
  const auto rep = eval::run_experiment(fs, lex, ds, cfg);
  out.write("checkpoint.txt",
            model::serialize_checkpoint(rep.model, {{"features", cfg.combination},
                                                    {"seed", std::to_string(cfg.seed)},
                                                    {"dataset", ds.name},
                                                    {"epoch", std::to_string(rep.epoch_best)}}));
  out.write("metrics.tsv", eval::metrics_header() + eval::metrics_row(rep));
  out.write("epochs.tsv", epoch_log(rep));
  log << report_line(rep);
}

inline void run_evaluate(const Options& o, OutputDir& out, std::ostream& log) {
  const auto ck = model::parse_checkpoint(text::read_lines(o.str("checkpoint")));
  std::string combo;
  if (o.has("features")) {
    combo = o.str("features");
  } else if (auto it = ck.meta.find("features"); it != ck.meta.end()) {
    combo = it->second;
  } else {
    throw UsageError("checkpoint names no feature combination; pass --features");
  }
  eval::check_combination(combo);
  const std::uint64_t train_seed = ck.meta.count("seed") ? std::stoull(ck.meta.at("seed")) : o.seed();
  const auto fs = load_tables(o, {combo});
  const auto lex = pinyin::Lexicon::load(o.str("lexicon"));
  const auto ds = eval::load_dataset(o.str("data"), ck.model.classes());
  const auto lookup = eval::build_lookup(fs, combo, lex, train::derive_seed(train_seed, 5));
  if (lookup.dim() != ck.model.input_dim())
    throw ShapeError("checkpoint expects features of width " + std::to_string(ck.model.input_dim()) + ", '" + combo +
                     "' has " + std::to_string(lookup.dim()));
  std::vector<std::size_t> idx;
  if (o.str("split", "all") == "test") {
    idx = eval::split_622(ds, o.seed()).test;
  } else {
    idx.resize(ds.samples.size());
    std::iota(idx.begin(), idx.end(), 0);
  }
  const auto samples = eval::select(ds, idx);
  const bool policy = lookup.has_phonetic();
  eval::ConfusionMatrix cm(ck.model.classes());
  std::string pred = "label\tpredicted\tpinyin\ttext\n";
  for (const auto& s : samples) {
    const auto enc = train::encode_sentence(lookup, lex, s.text);
    const auto p = train::predict_encoded(ck.model, enc, policy);
    cm.add(s.label, p.label);
    std::vector<std::string> py;
    for (std::size_t t = 0; t < enc.chars.size(); ++t)
      py.push_back(lex.contains(enc.chars[t]) ? pinyin::Syllable{lex.primary(enc.chars[t]).base, p.tones[t]}.str()
                                              : std::string(pinyin::kUnknownToken));
    pred += std::to_string(s.label) + "\t" + std::to_string(p.label) + "\t" + text::join(py, " ") + "\t" + s.text + "\n";
  }
  std::string conf = "truth\\predicted";
  for (int k = 0; k < cm.classes; ++k) conf += "\t" + std::to_string(k);
  conf += "\n";
  for (int t = 0; t < cm.classes; ++t) {
    conf += std::to_string(t);
    for (int k = 0; k < cm.classes; ++k) conf += "\t" + std::to_string(cm.at(t, k));
    conf += "\n";
  }
  out.write("evaluation.tsv", "config\tdataset\tsamples\taccuracy\n" + combo + "\t" + ds.name + "\t" +
                                  std::to_string(cm.total()) + "\t" + text::format_real(cm.accuracy()) + "\n");
  out.write("confusion.tsv", conf);
  out.write("predictions.tsv", pred);
  log << combo << " on " << ds.name << ": accuracy " << text::format_real(cm.accuracy()) << " over " << cm.total()
      << " samples\n";
}

inline void run_cross_eval(const Options& o, OutputDir& out, std::ostream& log) {
  eval::ExperimentConfig cfg;
  cfg.combination = o.str("features");
  cfg.seed = o.seed();
  cfg.train = training_config(o);
  const auto fs = load_tables(o, {cfg.combination});
  const auto lex = pinyin::Lexicon::load(o.str("lexicon"));
  const auto a = eval::load_dataset(o.str("source"));
  const auto b = eval::load_dataset(o.str("target"));
  const auto rep = eval::cross_domain(fs, lex, a, b, cfg);
  out.write("metrics.tsv", eval::metrics_header() + eval::metrics_row(rep));
  out.write("epochs.tsv", epoch_log(rep));
  log << report_line(rep);
}

inline void run_ablate(const Options& o, OutputDir& out, std::ostream& log) {
  std::vector<std::string> combos =
      o.has("combos") ? text::split(o.str("combos"), ',') : eval::phonetic_combinations();
  const int seeds = positive(o.integer("seeds", 1), "seeds");
  const bool synthetic = o.str("data") == "synthetic";
  const std::size_t size = static_cast<std::size_t>(positive(o.integer("size", 2000), "size"));
  std::optional<eval::FeatureSet> file_tables;
  std::optional<pinyin::Lexicon> file_lex;
  std::optional<eval::LabeledDataset> file_ds;
  if (!synthetic) {
    if (!o.has("lexicon")) throw UsageError("ablate on a dataset file needs --lexicon");
    file_tables = load_tables(o, combos);
    file_lex = pinyin::Lexicon::load(o.str("lexicon"));
    file_ds = eval::load_dataset(o.str("data"));
  }
  std::map<std::string, std::vector<double>> acc;
  std::string rows = eval::metrics_header();
  for (int k = 0; k < seeds; ++k) {
    const std::uint64_t seed = o.seed() + static_cast<std::uint64_t>(k);
    eval::ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.train = training_config(o, synthetic ? synth::train_config() : train::TrainConfig{});
    std::optional<synth::SyntheticTask> task;
    std::optional<eval::FeatureSet> syn_tables;
    if (synthetic) {
      task = synth::make_synthetic_task(seed, size);
      synth::FeatureOptions fo;
      fo.seed = seed;
      syn_tables = synth::build_features(*task, fo);
    }
    const auto& fs = synthetic ? *syn_tables : *file_tables;
    const auto& lex = synthetic ? task->lexicon : *file_lex;
    auto ds = synthetic ? task->dataset : *file_ds;
    if (seeds > 1) ds.name += "#" + std::to_string(seed);
    for (const auto& c : combos) {
      cfg.combination = c;
      const auto rep = eval::run_experiment(fs, lex, ds, cfg);
      rows += eval::metrics_row(rep);
      acc[c].push_back(rep.test_acc);
      log << report_line(rep);
    }
  }
  out.write("metrics.tsv", rows);
  if (seeds > 1) {
    std::string summary = "config\tseeds\tmean_test_acc\n";
    for (const auto& c : combos) {
      const auto& v = acc[c];
      summary += c + "\t" + std::to_string(v.size()) + "\t" +
                 text::format_real(std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size())) + "\n";
    }
    out.write("summary.tsv", summary);
  }
}

inline void run_overlap(const Options& o, OutputDir& out, std::ostream& log) {
  const auto lex = pinyin::Lexicon::load(o.str("lexicon"));
  const auto texts = [](const eval::LabeledDataset& ds) {
    std::vector<std::string> v;
    for (const auto& s : ds.samples) v.push_back(s.text);
    return v;
  };
  const auto a = texts(eval::load_dataset(o.str("train")));
  const auto b = texts(eval::load_dataset(o.str("test")));
  const double t = eval::token_overlap(a, b, eval::OverlapMode::textual);
  const double p = eval::token_overlap(a, b, eval::OverlapMode::phonetic, &lex);
  out.write("overlap.tsv", "mode\toverlap\ntextual\t" + text::format_real(t) + "\nphonetic\t" + text::format_real(p) + "\n");
  log << "textual " << text::format_real(t) << ", phonetic " << text::format_real(p) << "\n";
}

inline void run_project(const Options& o, OutputDir& out, std::ostream& log) {
  const auto table = FeatureTable::load(o.str("table"));
  std::size_t n = table.size();
  if (o.has("limit")) n = std::min(n, static_cast<std::size_t>(positive(o.integer("limit", 0), "limit")));
  if (n < 3) throw InvalidArgument("projection needs at least 3 rows");
  std::vector<num::Vector> vs;
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < n; ++i) {
    vs.push_back(table.row_at(i));
    tokens.push_back(table.tokens()[i]);
  }
  num::TsneOptions t;
  t.perplexity = o.real("perplexity", std::min(t.perplexity, (static_cast<double>(n) - 1) / 3.0));
  t.iterations = positive(o.integer("iterations", t.iterations), "iterations");
  const auto method = o.str("method", "pca") == "tsne" ? num::ProjectionMethod::tsne : num::ProjectionMethod::pca;
  out.write("projection.tsv", point_table(tokens, num::project_2d(vs, method, o.seed(), t)));
  log << n << " points\n";
}

inline int run_grad_check(const Options& o, std::ostream& log) {
  bool ok = true;
  for (const auto& r : gradsuite::run_all(o.seed())) {
    log << r.name << "\tmax_rel_error=" << text::format_real(r.max_rel_error)
        << "\ttolerance=" << text::format_real(r.tolerance) << "\t" << (r.passed() ? "ok" : "FAIL") << "\n";
    ok = ok && r.max_rel_error <= gradsuite::kTolerance;
  }
  return ok ? 0 : 1;
}

inline void run_make_synthetic(const Options& o, OutputDir& out, std::ostream& log) {
  const auto size = static_cast<std::size_t>(positive(o.integer("size", 2000), "size"));
  const auto task = synth::make_synthetic_task(o.seed(), size);
  const auto split = eval::split_622(task.dataset, o.seed());
  std::optional<eval::FeatureSet> fs;
  std::vector<phon::AcousticClipMatrix> clips;
  synth::FeatureOptions fo;
  fo.seed = o.seed();
  if (o.flag("with-tables", true)) {
    fs = synth::build_features(task, fo);
    clips = phon::synthetic_clips(task.bases, train::derive_seed(fo.seed, 12), fo.clips);
  }
  out.write("lexicon.tsv", task.lexicon.serialize());
  out.write("corpus.txt", text::join(task.corpus, "\n") + "\n");
  out.write("dataset.tsv", eval::serialize_dataset(task.dataset));
  out.write("info.tsv", "key\tvalue\nsize\t" + std::to_string(size) + "\ndesigned_cap\t" +
                            text::format_real(task.designed_cap) + "\ntest_bayes_cap\t" +
                            text::format_real(task.toneless_bayes_accuracy(split.test)) + "\n");
  if (fs) {
    out.write("T.tsv", fs->T->serialize());
    out.write("Ex0.tsv", fs->Ex0->serialize());
    out.write("Ex04.tsv", fs->Ex04->serialize());
    out.write("PO.tsv", fs->PO->serialize());
    out.write("PW.tsv", fs->PW->serialize());
    for (const auto& c : clips) out.write("clips/" + c.syllable.str() + ".csv", phon::serialize_clip(c));
    const auto& chars = task.lexicon.characters();
    auto bitmaps = vis::synthetic_bitmaps(chars.size(), train::derive_seed(fo.seed, 15));
    for (std::size_t i = 0; i < chars.size(); ++i) {
      bitmaps[i].ch = chars[i];
      out.write("bitmaps/" + vis::bitmap_file_name(chars[i]), vis::serialize_pgm(bitmaps[i]));
    }
  }
  log << size << " samples, toneless cap on the test split "
      << text::format_real(task.toneless_bayes_accuracy(split.test)) << "\n";
}

}  // namespace detail

/// Runs a parsed command. Module errors go to `err` with exit code 1 and
/// every file the command wrote is removed.
inline int execute(const Command& cmd, std::ostream& out, std::ostream& err) {
  if (cmd.verb == "help") {
    out << usage();
    return 0;
  }
  const VerbSpec* v = find_verb(cmd.verb);
  if (!v) {
    err << "error: unknown verb '" << cmd.verb << "'\n" << usage();
    return 2;
  }
  detail::Options o(cmd);
  if (!v->writes) {
    try {
      return detail::run_grad_check(o, out);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    }
  }
  OutputDir dir(o.str("out"));
  try {
    if (cmd.verb == "convert") detail::run_convert(o, dir, out);
    else if (cmd.verb == "audio-features") detail::run_audio_features(o, dir, out);
    else if (cmd.verb == "train-embeddings") detail::run_train_embeddings(o, dir, out);
    else if (cmd.verb == "train-convae") detail::run_train_convae(o, dir, out);
    else if (cmd.verb == "build-table") detail::run_build_table(o, dir, out);
    else if (cmd.verb == "train-disa") detail::run_train_disa(o, dir, out);
    else if (cmd.verb == "evaluate") detail::run_evaluate(o, dir, out);
    else if (cmd.verb == "cross-eval") detail::run_cross_eval(o, dir, out);
    else if (cmd.verb == "ablate") detail::run_ablate(o, dir, out);
    else if (cmd.verb == "overlap") detail::run_overlap(o, dir, out);
    else if (cmd.verb == "project") detail::run_project(o, dir, out);
    else if (cmd.verb == "make-synthetic") detail::run_make_synthetic(o, dir, out);
    dir.write("config.txt", detail::config_log(cmd));
  } catch (const UsageError& e) {
    dir.rollback();
    err << "error: " << e.what() << "\n" << usage();
    return 2;
  } catch (const std::exception& e) {
    dir.rollback();
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

/// Entry point for the executable.
inline int main(int argc, const char* const* argv) {
  Command cmd;
  try {
    cmd = parse_args(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << usage();
    return 2;
  }
  return execute(cmd, std::cout, std::cerr);
}

}  // namespace disa::cli

#endif  // DISA_CLI_HPP
