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

// Task corpus: apps, tasks and human labels stored as line-delimited JSON
// (apps.jsonl, tasks.jsonl, labels.jsonl).

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cuaeval {

struct AppSpec {
  std::string app_id;
  std::string display_name;
  std::string category;
  bool operator==(const AppSpec&) const = default;
};

enum class Complexity { kSimple, kMultiStep };

const char* to_string(Complexity c);
Complexity complexity_from_string(const std::string& s);

struct TaskSpec {
  std::string task_id;
  std::string app_id;
  std::string description;
  Complexity complexity = Complexity::kSimple;
  // Goal predicate source text; only simulated desktops can check it.
  std::optional<std::string> goal_predicate;
  bool operator==(const TaskSpec&) const = default;
};

enum class Label { kDone, kNotDone };

const char* to_string(Label l);
/// Accepts exactly "done" / "not_done"; anything else is kInvalidArgument.
Label label_from_string(const std::string& s);

struct HumanLabel {
  std::string task_id;
  std::string trajectory_id;
  Label label = Label::kNotDone;
  std::string annotator_id;
  std::string labeled_at;
  bool operator==(const HumanLabel&) const = default;
};

struct Corpus {
  std::vector<AppSpec> apps;
  std::vector<TaskSpec> tasks;
  std::vector<HumanLabel> labels;
  // Non-fatal findings from a lenient load (unknown fields).
  std::vector<std::string> warnings;

  const AppSpec* find_app(const std::string& app_id) const;
  const TaskSpec* find_task(const std::string& task_id) const;
};

struct LoadOptions {
  bool strict = false;  // reject unknown fields instead of warning
};

/// Reads `dir/apps.jsonl`, `dir/tasks.jsonl` and, if present,
/// `dir/labels.jsonl`. Errors name the file and line number.
Corpus load_corpus(const std::filesystem::path& dir, LoadOptions options = {});

/// Writes the three files back out (labels.jsonl only when non-empty).
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

/// SHA-256 over the canonical serialization of apps and tasks.
std::string corpus_hash(const Corpus& corpus);

nlohmann::json to_json(const AppSpec& app);
nlohmann::json to_json(const TaskSpec& task);
nlohmann::json to_json(const HumanLabel& label);
HumanLabel label_from_json(const nlohmann::json& j);

struct CorpusProfile {
  std::optional<int> expected_app_count;
  std::optional<int> expected_tasks_per_app;

  static CorpusProfile full() { return {42, 30}; }
  static CorpusProfile unconstrained() { return {}; }
  /// "full" or "unconstrained".
  static CorpusProfile named(const std::string& name);
};

struct Violation {
  std::string code;     // e.g. "app_count", "tasks_per_app"
  std::string subject;  // app_id or task_id the violation is about
  std::string message;
  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  bool passed = true;
  int app_count = 0;
  int task_count = 0;
  std::map<std::string, int> tasks_per_app;
  std::vector<Violation> violations;

  nlohmann::json to_json() const;
  bool operator==(const ValidationReport&) const = default;
};

/// Pure. Under a constrained profile the app count and each app's task count
/// must match exactly; every app declared must have its quota.
ValidationReport validate_corpus(const Corpus& corpus, const CorpusProfile& profile);

struct TaskFilter {
  std::vector<std::string> app_ids;
  std::optional<Complexity> complexity;
  std::vector<std::string> task_ids;

  bool matches(const TaskSpec& task) const;
  nlohmann::json to_json() const;
  static TaskFilter from_json(const nlohmann::json& j);
};

/// Tasks passing `filter`, sorted by task_id. With `limit` below the match
/// count, a seeded Fisher-Yates draw picks `limit` of them (still returned in
/// task_id order). Throws kFailedPrecondition when nothing matches.
std::vector<TaskSpec> select_tasks(const Corpus& corpus, const TaskFilter& filter,
                                   std::uint64_t seed,
                                   std::optional<std::size_t> limit = std::nullopt);

/// Latest label per (trajectory_id, annotator_id), file order deciding ties.
std::vector<HumanLabel> latest_labels(const std::vector<HumanLabel>& labels);

/// Append-only label file with a single serialized writer per instance.
class LabelLog {
 public:
  explicit LabelLog(std::filesystem::path path);

  /// Stamps `labeled_at` and appends one line. Returns the stored record.
  HumanLabel append(HumanLabel label);
  std::vector<HumanLabel> read_all() const;
  std::vector<HumanLabel> latest_for(const std::string& trajectory_id) const;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
};

std::vector<HumanLabel> read_labels_file(const std::filesystem::path& path);

}  // namespace cuaeval
