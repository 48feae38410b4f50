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

#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuaeval/agent.hpp"
#include "cuaeval/corpus.hpp"
#include "cuaeval/judge.hpp"
#include "cuaeval/run_records.hpp"
#include "cuaeval/sim/environment.hpp"
#include "cuaeval/trajectory_store.hpp"

namespace cuaeval {

struct EpisodeConfig {
  int max_retries = 1;
  int step_budget = 25;
};

void validate(const EpisodeConfig& config);

/// attempt 0 from a reset environment; each not-done verdict with retries left
/// hands its rationale to the next attempt, which continues from the current
/// environment state. Judge failures end the episode without a retry.
Episode run_episode(const TaskSpec& task, const Agent& agent, const Judge& judge,
                    Environment& env, const EpisodeConfig& config, TrajectoryStore& store,
                    const std::string& run_id);

struct BenchmarkOptions {
  std::string run_id;
  EpisodeConfig episode;
  int parallelism = 1;
  nlohmann::json config_snapshot = nlohmann::json::object();
  std::string corpus_hash;
};

struct BenchmarkResult {
  RunManifest manifest;
  std::vector<Episode> episodes;  // sorted by task_id
};

/// Creates the run and executes one episode per task on at most
/// `parallelism` threads, each with its own environment.
BenchmarkResult run_benchmark(const std::vector<TaskSpec>& tasks, const Agent& agent,
                              const Judge& judge, const EnvironmentFactory& make_env,
                              const BenchmarkOptions& options, TrajectoryStore& store);

struct VerdictSet {
  std::string run_id;
  std::string evaluator_id;
  std::map<std::string, Verdict> verdicts;  // by trajectory_id
};

/// Re-evaluates the final screenshot of every stored attempt and writes the
/// verdicts under the judge's evaluator id. Trajectories are left untouched.
VerdictSet rejudge_run(const std::string& run_id, const Judge& judge, const Corpus& corpus,
                       const TrajectoryStore& store);

/// "run-YYYYMMDDTHHMMSSZ-<6 hex>"
std::string generate_run_id();

}  // namespace cuaeval
