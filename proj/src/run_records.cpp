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

#include "cuaeval/run_records.hpp"

#include <algorithm>
#include <set>

#include "cuaeval/error.hpp"
#include "cuaeval/util.hpp"

namespace cuaeval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

json parse_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

}  // namespace

json to_json(const AttemptRecord& a) {
  json j{{"attempt_index", a.attempt_index},
         {"trajectory_id", a.trajectory_id},
         {"status", to_string(a.status)},
         {"step_count", a.step_count},
         {"verdict", to_json(a.verdict)}};
  put_opt(j, "feedback", a.feedback);
  put_opt(j, "ground_truth", a.ground_truth);
  put_opt(j, "opening_state_hash", a.opening_state_hash);
  put_opt(j, "closing_state_hash", a.closing_state_hash);
  return j;
}

AttemptRecord attempt_record_from_json(const json& j) {
  AttemptRecord a;
  a.attempt_index = j.at("attempt_index").get<int>();
  a.trajectory_id = j.at("trajectory_id").get<std::string>();
  a.status = trajectory_status_from_string(j.at("status").get<std::string>());
  a.step_count = j.at("step_count").get<int>();
  a.verdict = verdict_from_json(j.at("verdict"));
  a.feedback = get_opt<std::string>(j, "feedback");
  a.ground_truth = get_opt<bool>(j, "ground_truth");
  a.opening_state_hash = get_opt<std::string>(j, "opening_state_hash");
  a.closing_state_hash = get_opt<std::string>(j, "closing_state_hash");
  return a;
}

json to_json(const Episode& e) {
  json attempts = json::array();
  for (const auto& a : e.attempts) attempts.push_back(to_json(a));
  json j{{"episode_id", e.episode_id},
         {"run_id", e.run_id},
         {"task_id", e.task_id},
         {"agent_id", e.agent_id},
         {"evaluator_id", e.evaluator_id},
         {"attempts", attempts},
         {"baseline_success", e.baseline_success},
         {"final_success", e.final_success}};
  put_opt(j, "ground_truth", e.ground_truth);
  put_opt(j, "error", e.error);
  return j;
}

Episode episode_from_json(const json& j) {
  try {
    Episode e;
    e.episode_id = j.at("episode_id").get<std::string>();
    e.run_id = j.at("run_id").get<std::string>();
    e.task_id = j.at("task_id").get<std::string>();
    e.agent_id = j.at("agent_id").get<std::string>();
    e.evaluator_id = j.at("evaluator_id").get<std::string>();
    for (const auto& a : j.at("attempts")) e.attempts.push_back(attempt_record_from_json(a));
    e.baseline_success = j.at("baseline_success").get<bool>();
    e.final_success = j.at("final_success").get<bool>();
    e.ground_truth = get_opt<bool>(j, "ground_truth");
    e.error = get_opt<std::string>(j, "error");
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kParse, std::string("malformed episode record: ") + ex.what());
  }
}

int RunManifest::baseline_successes() const {
  return static_cast<int>(std::count_if(episodes.begin(), episodes.end(),
                                        [](const auto& e) { return e.baseline_success; }));
}

int RunManifest::final_successes() const {
  return static_cast<int>(std::count_if(episodes.begin(), episodes.end(),
                                        [](const auto& e) { return e.final_success; }));
}

json to_json(const RunManifest& m) {
  json episodes = json::array();
  for (const auto& e : m.episodes) {
    json s{{"task_id", e.task_id},
           {"attempts", e.attempts},
           {"baseline_success", e.baseline_success},
           {"final_success", e.final_success}};
    put_opt(s, "error", e.error);
    episodes.push_back(s);
  }
  return {{"run_id", m.run_id},
          {"config", m.config},
          {"corpus_hash", m.corpus_hash},
          {"agent_id", m.agent_id},
          {"evaluator_id", m.evaluator_id},
          {"created_at", m.created_at},
          {"completed_at", m.completed_at},
          {"episodes", episodes},
          {"n_tasks", m.episodes.size()},
          {"baseline_successes", m.baseline_successes()},
          {"final_successes", m.final_successes()},
          {"determinism_digest", m.determinism_digest}};
}

RunManifest run_manifest_from_json(const json& j) {
  try {
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.config = j.value("config", json::object());
    m.corpus_hash = j.value("corpus_hash", "");
    m.agent_id = j.at("agent_id").get<std::string>();
    m.evaluator_id = j.at("evaluator_id").get<std::string>();
    m.created_at = j.value("created_at", "");
    m.completed_at = j.value("completed_at", "");
    for (const auto& s : j.at("episodes")) {
      EpisodeSummary e;
      e.task_id = s.at("task_id").get<std::string>();
      e.attempts = s.at("attempts").get<int>();
      e.baseline_success = s.at("baseline_success").get<bool>();
      e.final_success = s.at("final_success").get<bool>();
      e.error = get_opt<std::string>(s, "error");
      m.episodes.push_back(std::move(e));
    }
    m.determinism_digest = j.value("determinism_digest", "");
    return m;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kParse, std::string("malformed run manifest: ") + ex.what());
  }
}

json canonical_outcome(const Episode& e) {
  json attempts = json::array();
  for (const auto& a : e.attempts) {
    json v{{"done", a.verdict.is_error() ? json(nullptr) : json(a.verdict.done)},
           {"rationale", a.verdict.rationale},
           {"parse_path", to_string(a.verdict.parse_path)},
           {"evaluator_id", a.verdict.evaluator_id}};
    json entry{{"attempt_index", a.attempt_index},
               {"status", to_string(a.status)},
               {"step_count", a.step_count},
               {"verdict", v}};
    put_opt(entry, "feedback", a.feedback);
    put_opt(entry, "ground_truth", a.ground_truth);
    put_opt(entry, "opening_state_hash", a.opening_state_hash);
    put_opt(entry, "closing_state_hash", a.closing_state_hash);
    attempts.push_back(entry);
  }
  json j{{"task_id", e.task_id},
         {"agent_id", e.agent_id},
         {"attempts", attempts},
         {"baseline_success", e.baseline_success},
         {"final_success", e.final_success}};
  put_opt(j, "error", e.error);
  return j;
}

std::string determinism_digest(std::vector<Episode> episodes) {
  std::sort(episodes.begin(), episodes.end(),
            [](const Episode& a, const Episode& b) { return a.task_id < b.task_id; });
  json all = json::array();
  for (const auto& e : episodes) all.push_back(canonical_outcome(e));
  return sha256_hex(all.dump());
}

void RunRecords::write_run_manifest(const RunManifest& m) const {
  write_file_atomic(store_.run_dir(m.run_id) / "run.json", to_json(m).dump(2));
}

RunManifest RunRecords::load_run_manifest(const std::string& run_id) const {
  fs::path path = store_.run_dir(run_id) / "run.json";
  if (!fs::exists(path)) throw Error(ErrorCode::kNotFound, "run '" + run_id + "' not found");
  return run_manifest_from_json(parse_file(path));
}

std::vector<RunManifest> RunRecords::list_run_manifests() const {
  std::vector<RunManifest> out;
  for (const auto& id : store_.list_runs()) {
    if (!is_safe_id(id) || !fs::exists(store_.run_dir(id) / "run.json")) continue;
    out.push_back(load_run_manifest(id));
  }
  return out;
}

void RunRecords::write_episode(const Episode& e) const {
  fs::path dir = store_.episode_dir(e.run_id, e.task_id);
  fs::create_directories(dir);
  write_file_atomic(dir / "episode.json", to_json(e).dump(2));
}

Episode RunRecords::load_episode(const std::string& run_id, const std::string& task_id) const {
  fs::path path = store_.episode_dir(run_id, task_id) / "episode.json";
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kNotFound,
                "episode '" + make_episode_id(run_id, task_id) + "' not found");
  }
  return episode_from_json(parse_file(path));
}

std::vector<Episode> RunRecords::load_episodes(const std::string& run_id) const {
  if (!store_.has_run(run_id)) throw Error(ErrorCode::kNotFound, "run '" + run_id + "' not found");
  std::vector<Episode> out;
  for (const auto& task_id : store_.list_episode_tasks(run_id)) {
    if (!is_slug(task_id)) continue;
    if (fs::exists(store_.episode_dir(run_id, task_id) / "episode.json")) {
      out.push_back(load_episode(run_id, task_id));
    }
  }
  return out;
}

fs::path RunRecords::verdict_path(const std::string& trajectory_id,
                                  const std::string& evaluator_id) const {
  if (!is_safe_id(evaluator_id)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid evaluator id '" + evaluator_id + "'");
  }
  auto key = parse_trajectory_id(trajectory_id);
  return store_.attempt_dir(key.run_id, key.task_id, key.attempt_index) / "verdicts" /
         (evaluator_id + ".json");
}

void RunRecords::write_verdict(const std::string& trajectory_id, const Verdict& v) const {
  fs::path path = verdict_path(trajectory_id, v.evaluator_id);
  json j = to_json(v);
  j["trajectory_id"] = trajectory_id;
  if (fs::exists(path)) {
    json old = parse_file(path);
    json a = old, b = j;
    a.erase("latency_ms");
    b.erase("latency_ms");
    if (a != b) {
      throw Error(ErrorCode::kAlreadyExists,
                  "a different verdict from '" + v.evaluator_id + "' is already stored for " +
                      trajectory_id);
    }
  }
  fs::create_directories(path.parent_path());
  write_file_atomic(path, j.dump(2));
}

std::optional<Verdict> RunRecords::load_verdict(const std::string& trajectory_id,
                                                const std::string& evaluator_id) const {
  fs::path path = verdict_path(trajectory_id, evaluator_id);
  if (!fs::exists(path)) return std::nullopt;
  return verdict_from_json(parse_file(path));
}

std::vector<std::string> RunRecords::list_evaluators(const std::string& run_id) const {
  std::set<std::string> ids;
  for (const auto& task_id : store_.list_episode_tasks(run_id)) {
    if (!is_slug(task_id)) continue;
    for (int n : store_.list_attempts(run_id, task_id)) {
      fs::path dir = store_.attempt_dir(run_id, task_id, n) / "verdicts";
      if (!fs::is_directory(dir)) continue;
      for (const auto& f : fs::directory_iterator(dir)) {
        if (f.path().extension() == ".json") ids.insert(f.path().stem().string());
      }
    }
  }
  return {ids.begin(), ids.end()};
}

std::map<std::string, Verdict> RunRecords::load_verdicts(const std::string& run_id,
                                                         const std::string& evaluator_id) const {
  std::map<std::string, Verdict> out;
  for (const auto& task_id : store_.list_episode_tasks(run_id)) {
    if (!is_slug(task_id)) continue;
    for (int n : store_.list_attempts(run_id, task_id)) {
      auto id = make_trajectory_id(run_id, task_id, n);
      if (auto v = load_verdict(id, evaluator_id)) out.emplace(id, std::move(*v));
    }
  }
  return out;
}

bool RunRecords::trajectory_exists(const std::string& trajectory_id) const {
  TrajectoryKey key;
  try {
    key = parse_trajectory_id(trajectory_id);
  } catch (const Error&) {
    return false;
  }
  fs::path manifest =
      store_.attempt_dir(key.run_id, key.task_id, key.attempt_index) / "manifest.json";
  if (!fs::exists(manifest)) return false;
  json j = json::parse(read_file(manifest), nullptr, false);
  return !j.is_discarded() && j.value("finalized", false);
}

ManifestWriter::ManifestWriter(const TrajectoryStore& store, RunManifest initial)
    : store_(store), manifest_(std::move(initial)) {
  RunRecords(store_).write_run_manifest(manifest_);
}

void ManifestWriter::record(const Episode& e) {
  json line{{"task_id", e.task_id},
            {"attempts", e.attempts.size()},
            {"baseline_success", e.baseline_success},
            {"final_success", e.final_success}};
  if (e.error) line["error"] = *e.error;
  std::lock_guard<std::mutex> lock(mu_);
  append_line(store_.run_dir(manifest_.run_id) / "episode_index.jsonl", line.dump());
}

RunManifest ManifestWriter::finish(const std::vector<Episode>& episodes) {
  std::lock_guard<std::mutex> lock(mu_);
  manifest_.episodes.clear();
  for (const auto& e : episodes) {
    manifest_.episodes.push_back({e.task_id, static_cast<int>(e.attempts.size()),
                                  e.baseline_success, e.final_success, e.error});
  }
  std::sort(manifest_.episodes.begin(), manifest_.episodes.end(),
            [](const auto& a, const auto& b) { return a.task_id < b.task_id; });
  manifest_.determinism_digest = determinism_digest(episodes);
  manifest_.completed_at = now_iso8601();
  RunRecords(store_).write_run_manifest(manifest_);
  return manifest_;
}

}  // namespace cuaeval
