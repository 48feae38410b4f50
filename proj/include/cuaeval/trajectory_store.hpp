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

// On-disk trajectory store.
//
// Layout under the store root:
//   runs/<run_id>/episodes/<task_id>/attempt-<n>/manifest.json
//   runs/<run_id>/episodes/<task_id>/attempt-<n>/screenshots/step-<i>.png
//   runs/<run_id>/episodes/<task_id>/attempt-<n>/screenshots/final.png
//   runs/<run_id>/episodes/<task_id>/attempt-0/screenshots/initial.png
// Simulated frames carry a `<name>.state.json` sidecar next to the PNG.
// Manifests are rewritten with write-temp-then-rename on every change.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuaeval/action.hpp"

namespace cuaeval {

inline constexpr int kManifestSchemaVersion = 1;

struct ScreenshotRef {
  std::string relative_path;  // relative to the attempt directory
  std::string content_hash;   // SHA-256 of the PNG bytes
  int width = 0;
  int height = 0;
  std::optional<std::string> sidecar_path;
  std::optional<std::string> sidecar_hash;

  bool operator==(const ScreenshotRef&) const = default;
};

struct Step {
  int index = 0;
  ActionRecord action;
  std::string reasoning;
  ScreenshotRef post_screenshot;  // captured after the action was applied

  bool operator==(const Step&) const = default;
};

enum class TrajectoryStatus { kCompletedDeclaration, kBudgetExhausted, kAgentError };

const char* to_string(TrajectoryStatus s);
TrajectoryStatus trajectory_status_from_string(const std::string& s);

struct Trajectory {
  std::string trajectory_id;  // <run_id>.<task_id>.<attempt_index>
  std::string run_id;
  std::string task_id;
  std::string agent_id;
  int attempt_index = 0;
  std::vector<Step> steps;
  std::optional<ScreenshotRef> initial_screenshot;  // attempt 0 only
  ScreenshotRef final_screenshot;
  TrajectoryStatus status = TrajectoryStatus::kCompletedDeclaration;
  // The agent's stated reason when it declared the task done.
  std::optional<std::string> final_reasoning;
  std::optional<std::string> error;  // set with kAgentError
  std::string started_at;
  std::string ended_at;

  bool operator==(const Trajectory&) const = default;
};

nlohmann::json to_json(const ScreenshotRef& ref);
nlohmann::json to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::json& j);

std::string make_trajectory_id(const std::string& run_id, const std::string& task_id,
                               int attempt_index);
std::string make_episode_id(const std::string& run_id, const std::string& task_id);

struct TrajectoryKey {
  std::string run_id;
  std::string task_id;
  int attempt_index = 0;
};
/// Throws kInvalidArgument on a malformed id.
TrajectoryKey parse_trajectory_id(const std::string& trajectory_id);

class TrajectoryStore;

// An attempt being recorded. Move-only; one writer per handle.
class TrajectoryHandle {
 public:
  TrajectoryHandle(TrajectoryHandle&&) noexcept = default;
  TrajectoryHandle& operator=(TrajectoryHandle&&) noexcept = default;
  TrajectoryHandle(const TrajectoryHandle&) = delete;
  TrajectoryHandle& operator=(const TrajectoryHandle&) = delete;

  bool is_open() const { return open_; }
  const std::string& trajectory_id() const { return trajectory_.trajectory_id; }
  const std::vector<Step>& steps() const { return trajectory_.steps; }
  const std::filesystem::path& directory() const { return dir_; }

  /// Stores `screenshots/initial.png`. Only valid on attempt 0 before any step.
  void set_initial_screenshot(const Screenshot& shot);

  /// Writes the post-action screenshot, appends a Step with the next index and
  /// rewrites the manifest atomically. Throws kFailedPrecondition if closed.
  Step append_step(const ActionRecord& action, const std::string& reasoning,
                   const Screenshot& screenshot);

  /// Persists the final screenshot, completes the manifest and closes the
  /// handle. Throws kFailedPrecondition when called twice.
  Trajectory finalize(const Screenshot& final_screenshot, TrajectoryStatus status,
                      std::optional<std::string> final_reasoning = std::nullopt,
                      std::optional<std::string> error = std::nullopt);

 private:
  friend class TrajectoryStore;
  TrajectoryHandle(std::filesystem::path dir, Trajectory stub);

  ScreenshotRef write_screenshot(const std::string& stem, const Screenshot& shot);
  void write_manifest(bool finalized);

  std::filesystem::path dir_;
  Trajectory trajectory_;
  bool open_ = true;
};

class TrajectoryStore {
 public:
  explicit TrajectoryStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  /// Creates `runs/<run_id>`. Throws kAlreadyExists if it exists.
  void create_run(const std::string& run_id);
  bool has_run(const std::string& run_id) const;
  std::vector<std::string> list_runs() const;

  std::filesystem::path run_dir(const std::string& run_id) const;
  std::filesystem::path episode_dir(const std::string& run_id,
                                    const std::string& task_id) const;
  std::filesystem::path attempt_dir(const std::string& run_id, const std::string& task_id,
                                    int attempt_index) const;

  /// Throws kNotFound if the run does not exist and kAlreadyExists if the
  /// attempt was already finalized. A stale unfinalized attempt is replaced.
  TrajectoryHandle begin_trajectory(const std::string& run_id, const std::string& task_id,
                                    const std::string& agent_id, int attempt_index);

  /// Verifies every screenshot (and sidecar) digest. Throws kNotFound for a
  /// missing or unfinalized manifest, kIntegrity naming the offending file.
  Trajectory load_trajectory(const std::string& run_id, const std::string& task_id,
                             int attempt_index) const;

  /// Attempt indices with a manifest on disk, ascending.
  std::vector<int> list_attempts(const std::string& run_id, const std::string& task_id) const;
  std::vector<std::string> list_episode_tasks(const std::string& run_id) const;

  /// Reads the PNG bytes of `ref` within an attempt, verifying the digest.
  Screenshot read_screenshot(const std::string& run_id, const std::string& task_id,
                             int attempt_index, const ScreenshotRef& ref) const;

 private:
  std::filesystem::path root_;
};

}  // namespace cuaeval
