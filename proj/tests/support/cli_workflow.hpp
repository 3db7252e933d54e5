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


#ifndef DISA_TESTS_CLI_WORKFLOW_HPP
#define DISA_TESTS_CLI_WORKFLOW_HPP

// Drives the command-line front end in-process and checks that every run
// repeats byte for byte when replayed from the config.txt it logged.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "disa/cli.hpp"

namespace disa::oracle {

struct CliRun {
  int code = 0;
  std::string out, err;
};

inline CliRun run_cli(const std::vector<std::string>& args) {
  CliRun r;
  std::ostringstream out, err;
  try {
    r.code = cli::execute(cli::parse_args(args, std::nullopt), out, err);
  } catch (const cli::UsageError& e) {
    err << e.what();
    r.code = 2;
  }
  r.out = out.str();
  r.err = err.str();
  return r;
}

/// Relative path -> content of every regular file under `dir`.
inline std::map<std::string, std::string> dir_contents(const std::string& dir) {
  namespace fs = std::filesystem;
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return out;
}

struct Replay {
  bool ok = false;
  std::string detail;
};

/// Re-runs the command logged in `<dir>/config.txt` into `<dir>.replay` and
/// compares every output file.
inline Replay replay(const std::string& dir) {
  Replay r;
  const auto cfg = dir + "/config.txt";
  if (!std::filesystem::exists(cfg)) {
    r.detail = "no config.txt in " + dir;
    return r;
  }
  const auto first = text::read_lines(cfg).at(0);
  const std::string verb = first.substr(std::string("# disa ").size());
  const auto again = dir + ".replay";
  std::filesystem::remove_all(again);
  const auto run = run_cli({verb, "--config", cfg, "--out", again});
  if (run.code != 0) {
    r.detail = verb + " replay failed: " + run.err;
    return r;
  }
  const auto a = dir_contents(dir), b = dir_contents(again);
  if (a.size() != b.size()) {
    r.detail = verb + ": file sets differ";
    return r;
  }
  for (const auto& [name, content] : a) {
    auto it = b.find(name);
    if (it == b.end() || it->second != content) {
      r.detail = verb + ": " + name + " differs";
      return r;
    }
  }
  r.ok = true;
  r.detail = verb + ": " + std::to_string(a.size()) + " files identical";
  return r;
}

}  // namespace disa::oracle

#endif  // DISA_TESTS_CLI_WORKFLOW_HPP
