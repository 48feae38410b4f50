// Copyright 2026 The cuaeval Authors
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

// Run configuration files. Relative paths resolve against the directory of
// the config file. Secrets never appear in a config; specs name environment
// variables instead.

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuaeval/agent.hpp"
#include "cuaeval/corpus.hpp"
#include "cuaeval/feedback_loop.hpp"
#include "cuaeval/judge.hpp"
#include "cuaeval/sim/app_def.hpp"

namespace cuaeval {

/// Builds an agent from {"kind": "scripted"|"flaky"|"remote", ...}.
std::shared_ptr<const Agent> make_agent(const nlohmann::json& spec,
                                        const std::filesystem::path& base_dir);

/// Builds a judge from {"kind": "oracle"|"noisy"|"remote", ...}. Noisy specs
/// wrap an "inner" spec (oracle by default).
std::shared_ptr<const Judge> make_judge(const nlohmann::json& spec);

struct RunConfig {
  std::filesystem::path source;    // config file, if loaded from disk
  std::filesystem::path base_dir;  // relative paths in specs resolve here
  std::filesystem::path corpus_dir;
  std::filesystem::path sim_apps_dir;
  std::filesystem::path store_root;
  TaskFilter filter;
  std::optional<std::size_t> limit;
  std::uint64_t seed = 0;
  nlohmann::json agent_spec;
  nlohmann::json judge_spec;
  EpisodeConfig episode;
  int parallelism = 1;
  ScreenBounds screen;
  std::optional<std::string> run_id;

  /// Snapshot embedded in the run manifest (paths as given, resolved).
  nlohmann::json snapshot() const;
};

/// Parses and checks field types. Throws kParse / kInvalidArgument.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Fully resolved run, validated before anything executes.
struct PreparedRun {
  RunConfig config;
  Corpus corpus;
  std::shared_ptr<const sim::AppRegistry> apps;
  std::vector<TaskSpec> tasks;
  std::shared_ptr<const Agent> agent;
  std::shared_ptr<const Judge> judge;
};

/// Loads the corpus and app definitions, selects tasks and builds the
/// components. Goal predicates must resolve against the simulated apps.
PreparedRun prepare_run(const RunConfig& config);

BenchmarkResult execute_run(const PreparedRun& run, TrajectoryStore& store);

}  // namespace cuaeval
