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

// Episode records, run manifests and verdict files stored next to the
// trajectories:
//   runs/<run_id>/run.json
//   runs/<run_id>/episode_index.jsonl
//   runs/<run_id>/episodes/<task_id>/episode.json
//   runs/<run_id>/episodes/<task_id>/attempt-<n>/verdicts/<evaluator_id>.json

#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuaeval/judge.hpp"
#include "cuaeval/trajectory_store.hpp"

namespace cuaeval {

struct AttemptRecord {
  int attempt_index = 0;
  std::string trajectory_id;
  TrajectoryStatus status = TrajectoryStatus::kCompletedDeclaration;
  int step_count = 0;
  Verdict verdict;
  // Feedback handed to the agent for this attempt (absent on attempt 0).
  std::optional<std::string> feedback;
  // Goal predicate on the closing state, when the environment exposes one.
  std::optional<bool> ground_truth;
  // SHA-256 of the state sidecar opening and closing the attempt.
  std::optional<std::string> opening_state_hash;
  std::optional<std::string> closing_state_hash;

  bool operator==(const AttemptRecord&) const = default;
};

struct Episode {
  std::string episode_id;
  std::string run_id;
  std::string task_id;
  std::string agent_id;
  std::string evaluator_id;
  std::vector<AttemptRecord> attempts;
  bool baseline_success = false;
  bool final_success = false;
  std::optional<bool> ground_truth;  // of the last attempt
  std::optional<std::string> error;  // set when the judge failed

  bool operator==(const Episode&) const = default;
};

nlohmann::json to_json(const AttemptRecord& a);
AttemptRecord attempt_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Episode& e);
Episode episode_from_json(const nlohmann::json& j);

struct EpisodeSummary {
  std::string task_id;
  int attempts = 0;
  bool baseline_success = false;
  bool final_success = false;
  std::optional<std::string> error;
  bool operator==(const EpisodeSummary&) const = default;
};

struct RunManifest {
  std::string run_id;
  nlohmann::json config;  // snapshot of the run configuration
  std::string corpus_hash;
  std::string agent_id;
  std::string evaluator_id;
  std::string created_at;
  std::string completed_at;
  std::vector<EpisodeSummary> episodes;  // sorted by task_id
  std::string determinism_digest;

  int baseline_successes() const;
  int final_successes() const;
  bool operator==(const RunManifest&) const = default;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest run_manifest_from_json(const nlohmann::json& j);

/// Canonical outcome of one episode: no run id, timestamps, latencies or raw
/// responses, so equal behaviour gives equal bytes.
nlohmann::json canonical_outcome(const Episode& e);
/// SHA-256 over the canonical outcomes sorted by task_id.
std::string determinism_digest(std::vector<Episode> episodes);

class RunRecords {
 public:
  explicit RunRecords(const TrajectoryStore& store) : store_(store) {}

  void write_run_manifest(const RunManifest& m) const;
  /// Throws kNotFound.
  RunManifest load_run_manifest(const std::string& run_id) const;
  /// Manifests of every run with a run.json, by run_id.
  std::vector<RunManifest> list_run_manifests() const;

  void write_episode(const Episode& e) const;
  Episode load_episode(const std::string& run_id, const std::string& task_id) const;
  std::vector<Episode> load_episodes(const std::string& run_id) const;

  /// Fails with kAlreadyExists if a different verdict is already stored under
  /// the same evaluator for that attempt.
  void write_verdict(const std::string& trajectory_id, const Verdict& v) const;
  std::optional<Verdict> load_verdict(const std::string& trajectory_id,
                                      const std::string& evaluator_id) const;
  std::vector<std::string> list_evaluators(const std::string& run_id) const;
  /// Every stored verdict of one evaluator in a run, by trajectory_id.
  std::map<std::string, Verdict> load_verdicts(const std::string& run_id,
                                               const std::string& evaluator_id) const;

  /// True if the trajectory's attempt directory holds a finalized manifest.
  bool trajectory_exists(const std::string& trajectory_id) const;

 private:
  std::filesystem::path verdict_path(const std::string& trajectory_id,
                                     const std::string& evaluator_id) const;

  const TrajectoryStore& store_;
};

// Serializes episode completions of a running benchmark into the index file.
class ManifestWriter {
 public:
  ManifestWriter(const TrajectoryStore& store, RunManifest initial);

  void record(const Episode& e);
  /// Writes run.json with the digest and returns the final manifest.
  RunManifest finish(const std::vector<Episode>& episodes);

 private:
  const TrajectoryStore& store_;
  RunManifest manifest_;
  std::mutex mu_;
};

}  // namespace cuaeval
