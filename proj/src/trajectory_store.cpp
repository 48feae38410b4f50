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

#include "cuaeval/trajectory_store.hpp"

#include <algorithm>

#include "cuaeval/error.hpp"
#include "cuaeval/sim/render.hpp"
#include "cuaeval/util.hpp"

namespace cuaeval {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::kCompletedDeclaration: return "completed_declaration";
    case TrajectoryStatus::kBudgetExhausted: return "budget_exhausted";
    case TrajectoryStatus::kAgentError: return "agent_error";
  }
  return "agent_error";
}

TrajectoryStatus trajectory_status_from_string(const std::string& s) {
  if (s == "completed_declaration") return TrajectoryStatus::kCompletedDeclaration;
  if (s == "budget_exhausted") return TrajectoryStatus::kBudgetExhausted;
  if (s == "agent_error") return TrajectoryStatus::kAgentError;
  throw Error(ErrorCode::kParse, "unknown trajectory status '" + s + "'");
}

std::string make_trajectory_id(const std::string& run_id, const std::string& task_id,
                               int attempt_index) {
  return run_id + "." + task_id + "." + std::to_string(attempt_index);
}

std::string make_episode_id(const std::string& run_id, const std::string& task_id) {
  return run_id + "." + task_id;
}

TrajectoryKey parse_trajectory_id(const std::string& id) {
  auto last = id.rfind('.');
  if (last == std::string::npos || last == 0) {
    throw Error(ErrorCode::kInvalidArgument, "malformed trajectory id '" + id + "'");
  }
  auto mid = id.rfind('.', last - 1);
  if (mid == std::string::npos || mid == 0) {
    throw Error(ErrorCode::kInvalidArgument, "malformed trajectory id '" + id + "'");
  }
  TrajectoryKey key;
  key.run_id = id.substr(0, mid);
  key.task_id = id.substr(mid + 1, last - mid - 1);
  std::string n = id.substr(last + 1);
  if (n.empty() || !std::all_of(n.begin(), n.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      n.size() > 6) {
    throw Error(ErrorCode::kInvalidArgument, "malformed trajectory id '" + id + "'");
  }
  key.attempt_index = std::stoi(n);
  if (!is_safe_id(key.run_id) || !is_slug(key.task_id)) {
    throw Error(ErrorCode::kInvalidArgument, "malformed trajectory id '" + id + "'");
  }
  return key;
}

json to_json(const ScreenshotRef& ref) {
  json j{{"relative_path", ref.relative_path},
         {"content_hash", ref.content_hash},
         {"width", ref.width},
         {"height", ref.height}};
  if (ref.sidecar_path) j["sidecar_path"] = *ref.sidecar_path;
  if (ref.sidecar_hash) j["sidecar_hash"] = *ref.sidecar_hash;
  return j;
}

namespace {

ScreenshotRef ref_from_json(const json& j) {
  ScreenshotRef r;
  r.relative_path = j.at("relative_path").get<std::string>();
  r.content_hash = j.at("content_hash").get<std::string>();
  r.width = j.at("width").get<int>();
  r.height = j.at("height").get<int>();
  if (j.contains("sidecar_path")) r.sidecar_path = j.at("sidecar_path").get<std::string>();
  if (j.contains("sidecar_hash")) r.sidecar_hash = j.at("sidecar_hash").get<std::string>();
  return r;
}

json manifest_json(const Trajectory& t, bool finalized) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    steps.push_back({{"index", s.index},
                     {"action", action_to_json(s.action)},
                     {"reasoning", s.reasoning},
                     {"post_screenshot", to_json(s.post_screenshot)}});
  }
  json j{{"schema_version", kManifestSchemaVersion},
         {"trajectory_id", t.trajectory_id},
         {"run_id", t.run_id},
         {"task_id", t.task_id},
         {"agent_id", t.agent_id},
         {"attempt_index", t.attempt_index},
         {"finalized", finalized},
         {"steps", steps},
         {"started_at", t.started_at}};
  if (t.initial_screenshot) j["initial_screenshot"] = to_json(*t.initial_screenshot);
  if (finalized) {
    j["status"] = to_string(t.status);
    j["final_screenshot"] = to_json(t.final_screenshot);
    j["ended_at"] = t.ended_at;
    if (t.final_reasoning) j["final_reasoning"] = *t.final_reasoning;
    if (t.error) j["error"] = *t.error;
  }
  return j;
}

void verify_file(const fs::path& path, const std::string& expected_hash) {
  Bytes bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const Error&) {
    throw Error(ErrorCode::kIntegrity, "missing screenshot file " + path.string());
  }
  if (sha256_hex(bytes) != expected_hash) {
    throw Error(ErrorCode::kIntegrity, "hash mismatch for " + path.string());
  }
}

void verify_ref(const fs::path& dir, const ScreenshotRef& ref) {
  verify_file(dir / ref.relative_path, ref.content_hash);
  if (ref.sidecar_path) verify_file(dir / *ref.sidecar_path, ref.sidecar_hash.value_or(""));
}

}  // namespace

json to_json(const Trajectory& t) { return manifest_json(t, true); }

Trajectory trajectory_from_json(const json& j) {
  try {
    if (j.at("schema_version").get<int>() != kManifestSchemaVersion) {
      throw Error(ErrorCode::kParse, "unsupported manifest schema_version");
    }
    Trajectory t;
    t.trajectory_id = j.at("trajectory_id").get<std::string>();
    t.run_id = j.at("run_id").get<std::string>();
    t.task_id = j.at("task_id").get<std::string>();
    t.agent_id = j.at("agent_id").get<std::string>();
    t.attempt_index = j.at("attempt_index").get<int>();
    for (const auto& s : j.at("steps")) {
      t.steps.push_back({s.at("index").get<int>(), action_from_json(s.at("action")),
                         s.at("reasoning").get<std::string>(),
                         ref_from_json(s.at("post_screenshot"))});
    }
    if (j.contains("initial_screenshot")) {
      t.initial_screenshot = ref_from_json(j.at("initial_screenshot"));
    }
    t.started_at = j.value("started_at", "");
    if (j.value("finalized", false)) {
      t.status = trajectory_status_from_string(j.at("status").get<std::string>());
      t.final_screenshot = ref_from_json(j.at("final_screenshot"));
      t.ended_at = j.value("ended_at", "");
      if (j.contains("final_reasoning")) {
        t.final_reasoning = j.at("final_reasoning").get<std::string>();
      }
      if (j.contains("error")) t.error = j.at("error").get<std::string>();
    }
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed trajectory manifest: ") + e.what());
  }
}

TrajectoryHandle::TrajectoryHandle(fs::path dir, Trajectory stub)
    : dir_(std::move(dir)), trajectory_(std::move(stub)) {}

ScreenshotRef TrajectoryHandle::write_screenshot(const std::string& stem, const Screenshot& shot) {
  sim::PngInfo info;
  try {
    info = sim::inspect_png(shot.png);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("screenshot rejected: ") + e.what());
  }
  ScreenshotRef ref;
  ref.relative_path = "screenshots/" + stem + ".png";
  ref.content_hash = sha256_hex(shot.png);
  ref.width = info.width;
  ref.height = info.height;
  write_file_atomic(dir_ / ref.relative_path, shot.png);
  if (shot.state_sidecar) {
    ref.sidecar_path = "screenshots/" + stem + ".state.json";
    ref.sidecar_hash = sha256_hex(*shot.state_sidecar);
    write_file_atomic(dir_ / *ref.sidecar_path, *shot.state_sidecar);
  }
  return ref;
}

void TrajectoryHandle::write_manifest(bool finalized) {
  write_file_atomic(dir_ / "manifest.json", manifest_json(trajectory_, finalized).dump(2));
}

void TrajectoryHandle::set_initial_screenshot(const Screenshot& shot) {
  if (!open_) throw Error(ErrorCode::kFailedPrecondition, "trajectory handle is closed");
  if (trajectory_.attempt_index != 0 || !trajectory_.steps.empty()) {
    throw Error(ErrorCode::kFailedPrecondition,
                "initial screenshot belongs to attempt 0 before any step");
  }
  trajectory_.initial_screenshot = write_screenshot("initial", shot);
  write_manifest(false);
}

Step TrajectoryHandle::append_step(const ActionRecord& action, const std::string& reasoning,
                                   const Screenshot& screenshot) {
  if (!open_) throw Error(ErrorCode::kFailedPrecondition, "trajectory handle is closed");
  Step step;
  step.index = static_cast<int>(trajectory_.steps.size());
  step.action = action;
  step.reasoning = reasoning;
  step.post_screenshot = write_screenshot("step-" + std::to_string(step.index), screenshot);
  trajectory_.steps.push_back(step);
  write_manifest(false);
  return step;
}

Trajectory TrajectoryHandle::finalize(const Screenshot& final_screenshot,
                                      TrajectoryStatus status,
                                      std::optional<std::string> final_reasoning,
                                      std::optional<std::string> error) {
  if (!open_) throw Error(ErrorCode::kFailedPrecondition, "trajectory already finalized");
  trajectory_.final_screenshot = write_screenshot("final", final_screenshot);
  trajectory_.status = status;
  trajectory_.final_reasoning = std::move(final_reasoning);
  trajectory_.error = std::move(error);
  trajectory_.ended_at = now_iso8601();
  write_manifest(true);
  open_ = false;
  return trajectory_;
}

TrajectoryStore::TrajectoryStore(fs::path root) : root_(std::move(root)) {}

fs::path TrajectoryStore::run_dir(const std::string& run_id) const {
  if (!is_safe_id(run_id)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid run id '" + run_id + "'");
  }
  return root_ / "runs" / run_id;
}

fs::path TrajectoryStore::episode_dir(const std::string& run_id,
                                      const std::string& task_id) const {
  if (!is_slug(task_id)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid task id '" + task_id + "'");
  }
  return run_dir(run_id) / "episodes" / task_id;
}

fs::path TrajectoryStore::attempt_dir(const std::string& run_id, const std::string& task_id,
                                      int attempt_index) const {
  if (attempt_index < 0) throw Error(ErrorCode::kInvalidArgument, "negative attempt index");
  return episode_dir(run_id, task_id) / ("attempt-" + std::to_string(attempt_index));
}

void TrajectoryStore::create_run(const std::string& run_id) {
  fs::path dir = run_dir(run_id);
  fs::create_directories(dir.parent_path());
  std::error_code ec;
  if (!fs::create_directory(dir, ec)) {
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
    throw Error(ErrorCode::kAlreadyExists, "run '" + run_id + "' already exists");
  }
}

bool TrajectoryStore::has_run(const std::string& run_id) const {
  return is_safe_id(run_id) && fs::is_directory(run_dir(run_id));
}

std::vector<std::string> TrajectoryStore::list_runs() const {
  std::vector<std::string> out;
  fs::path dir = root_ / "runs";
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory()) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

TrajectoryHandle TrajectoryStore::begin_trajectory(const std::string& run_id,
                                                   const std::string& task_id,
                                                   const std::string& agent_id,
                                                   int attempt_index) {
  if (!has_run(run_id)) throw Error(ErrorCode::kNotFound, "run '" + run_id + "' not found");
  fs::path dir = attempt_dir(run_id, task_id, attempt_index);
  fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    json j = json::parse(read_file(manifest), nullptr, false);
    if (!j.is_discarded() && j.value("finalized", false)) {
      throw Error(ErrorCode::kAlreadyExists,
                  "attempt " + std::to_string(attempt_index) + " of task '" + task_id +
                      "' is already finalized in run '" + run_id + "'");
    }
    fs::remove_all(dir);
  }
  fs::create_directories(dir / "screenshots");
  Trajectory stub;
  stub.trajectory_id = make_trajectory_id(run_id, task_id, attempt_index);
  stub.run_id = run_id;
  stub.task_id = task_id;
  stub.agent_id = agent_id;
  stub.attempt_index = attempt_index;
  stub.started_at = now_iso8601();
  TrajectoryHandle handle(dir, std::move(stub));
  handle.write_manifest(false);
  return handle;
}

Trajectory TrajectoryStore::load_trajectory(const std::string& run_id,
                                            const std::string& task_id,
                                            int attempt_index) const {
  fs::path dir = attempt_dir(run_id, task_id, attempt_index);
  fs::path manifest = dir / "manifest.json";
  if (!fs::exists(manifest)) {
    throw Error(ErrorCode::kNotFound, "no manifest for attempt " +
                                          std::to_string(attempt_index) + " of task '" +
                                          task_id + "' in run '" + run_id + "'");
  }
  json j;
  try {
    j = json::parse(read_file(manifest));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, manifest.string() + ": " + e.what());
  }
  if (!j.value("finalized", false)) {
    throw Error(ErrorCode::kNotFound, manifest.string() + " is not finalized");
  }
  Trajectory t = trajectory_from_json(j);
  if (t.initial_screenshot) verify_ref(dir, *t.initial_screenshot);
  for (const auto& s : t.steps) verify_ref(dir, s.post_screenshot);
  verify_ref(dir, t.final_screenshot);
  return t;
}

std::vector<int> TrajectoryStore::list_attempts(const std::string& run_id,
                                                const std::string& task_id) const {
  std::vector<int> out;
  fs::path dir = episode_dir(run_id, task_id);
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    auto name = e.path().filename().string();
    if (e.is_directory() && name.rfind("attempt-", 0) == 0 &&
        fs::exists(e.path() / "manifest.json")) {
      try {
        out.push_back(std::stoi(name.substr(8)));
      } catch (const std::exception&) {
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> TrajectoryStore::list_episode_tasks(const std::string& run_id) const {
  std::vector<std::string> out;
  fs::path dir = run_dir(run_id) / "episodes";
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory()) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Screenshot TrajectoryStore::read_screenshot(const std::string& run_id,
                                            const std::string& task_id, int attempt_index,
                                            const ScreenshotRef& ref) const {
  fs::path dir = attempt_dir(run_id, task_id, attempt_index);
  verify_ref(dir, ref);
  Screenshot shot;
  shot.png = read_file_bytes(dir / ref.relative_path);
  if (ref.sidecar_path) shot.state_sidecar = read_file(dir / *ref.sidecar_path);
  shot.width = ref.width;
  shot.height = ref.height;
  return shot;
}

}  // namespace cuaeval
