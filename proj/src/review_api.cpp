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

#include "cuaeval/review_api.hpp"

#include <algorithm>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "cuaeval/error.hpp"
#include "cuaeval/metrics.hpp"
#include "cuaeval/report.hpp"
#include "cuaeval/run_records.hpp"
#include "cuaeval/util.hpp"

namespace cuaeval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ApiResponse json_response(int status, const json& body) {
  ApiResponse r;
  r.status = status;
  r.body = body.dump();
  return r;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i <= path.size()) {
    std::size_t j = path.find('/', i);
    if (j == std::string::npos) j = path.size();
    if (j > i) out.push_back(path.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

std::string screenshot_url(const std::string& hash) { return "/api/screenshots/" + hash; }

json ref_json(const ScreenshotRef& ref) {
  json j = to_json(ref);
  j["url"] = screenshot_url(ref.content_hash);
  return j;
}

json labels_json(const std::vector<HumanLabel>& labels) {
  json arr = json::array();
  for (const auto& l : labels) arr.push_back(to_json(l));
  return arr;
}

bool is_hex_digest(const std::string& s) {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

// Best effort: the corpus recorded in the run config, if still readable.
std::map<std::string, std::string> task_descriptions(const RunManifest& m) {
  std::map<std::string, std::string> out;
  try {
    if (m.config.contains("corpus") && m.config.at("corpus").is_string()) {
      auto corpus = load_corpus(m.config.at("corpus").get<std::string>());
      for (const auto& t : corpus.tasks) out.emplace(t.task_id, t.description);
    }
  } catch (const std::exception&) {
  }
  return out;
}

}  // namespace

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse: return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kAlreadyExists:
    case ErrorCode::kFailedPrecondition: return 409;
    case ErrorCode::kTransport: return 502;
    case ErrorCode::kIntegrity:
    case ErrorCode::kIo: return 500;
  }
  return 500;
}

ApiResponse error_response(int status, const std::string& code, const std::string& message) {
  return json_response(status, {{"code", code}, {"message", message}});
}

ReviewApi::ReviewApi(fs::path store_root, std::optional<fs::path> labels_path)
    : store_(store_root), labels_(labels_path.value_or(store_root / "labels.jsonl")) {
  if (!fs::is_directory(store_root)) {
    throw Error(ErrorCode::kNotFound, "store root " + store_root.string() + " is not a directory");
  }
}

ApiResponse ReviewApi::handle(const std::string& method, const std::string& path,
                              const std::map<std::string, std::string>& query,
                              const std::string& body) const {
  try {
    auto seg = split_path(path);
    if (seg.empty() || seg[0] != "api") return error_response(404, "not_found", "no such endpoint");
    const bool get = method == "GET";
    if (seg.size() == 2 && seg[1] == "labels") {
      if (get) return labels(query);
      if (method == "POST") return submit_label(body);
      return error_response(405, "method_not_allowed", method + " not allowed here");
    }
    if (!get) return error_response(405, "method_not_allowed", method + " not allowed here");
    if (seg.size() == 2 && seg[1] == "runs") return list_runs();
    if (seg.size() == 4 && seg[1] == "runs" && seg[3] == "episodes") return run_episodes(seg[2]);
    if (seg.size() == 4 && seg[1] == "runs" && seg[3] == "disagreements") {
      return disagreements(seg[2], query);
    }
    if (seg.size() == 3 && seg[1] == "episodes") return episode(seg[2]);
    if (seg.size() == 3 && seg[1] == "screenshots") return screenshot(seg[2]);
    if (seg.size() == 3 && seg[1] == "metrics") return metrics(seg[2], query);
    return error_response(404, "not_found", "no such endpoint: " + path);
  } catch (const Error& e) {
    return error_response(http_status_for(e.code()), to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

ApiResponse ReviewApi::list_runs() const {
  RunRecords records(store_);
  json arr = json::array();
  for (const auto& m : records.list_run_manifests()) {
    arr.push_back({{"run_id", m.run_id},
                   {"agent_id", m.agent_id},
                   {"evaluator_id", m.evaluator_id},
                   {"evaluators", records.list_evaluators(m.run_id)},
                   {"created_at", m.created_at},
                   {"completed_at", m.completed_at},
                   {"n_tasks", m.episodes.size()},
                   {"baseline_successes", m.baseline_successes()},
                   {"final_successes", m.final_successes()},
                   {"corpus_hash", m.corpus_hash},
                   {"determinism_digest", m.determinism_digest}});
  }
  return json_response(200, arr);
}

ApiResponse ReviewApi::run_episodes(const std::string& run_id) const {
  if (!is_safe_id(run_id) || !store_.has_run(run_id)) {
    return error_response(404, "not_found", "run '" + run_id + "' not found");
  }
  RunRecords records(store_);
  auto descriptions = task_descriptions(records.load_run_manifest(run_id));
  auto all_labels = labels_.read_all();
  json arr = json::array();
  for (const auto& e : records.load_episodes(run_id)) {
    bool labeled = std::any_of(all_labels.begin(), all_labels.end(), [&](const HumanLabel& l) {
      return l.trajectory_id == e.attempts.back().trajectory_id;
    });
    json j{{"episode_id", e.episode_id},
           {"task_id", e.task_id},
           {"agent_id", e.agent_id},
           {"evaluator_id", e.evaluator_id},
           {"attempt_count", e.attempts.size()},
           {"baseline_success", e.baseline_success},
           {"final_success", e.final_success},
           {"final_trajectory_id", e.attempts.back().trajectory_id},
           {"labeled", labeled}};
    if (e.ground_truth) j["ground_truth"] = *e.ground_truth;
    if (e.error) j["error"] = *e.error;
    if (auto it = descriptions.find(e.task_id); it != descriptions.end()) {
      j["task_description"] = it->second;
    }
    arr.push_back(j);
  }
  return json_response(200, arr);
}

ApiResponse ReviewApi::episode(const std::string& episode_id) const {
  auto dot = episode_id.rfind('.');
  if (dot == std::string::npos || dot == 0) {
    return error_response(404, "not_found", "episode '" + episode_id + "' not found");
  }
  std::string run_id = episode_id.substr(0, dot);
  std::string task_id = episode_id.substr(dot + 1);
  if (!is_safe_id(run_id) || !is_slug(task_id) || !store_.has_run(run_id)) {
    return error_response(404, "not_found", "episode '" + episode_id + "' not found");
  }
  RunRecords records(store_);
  Episode e = records.load_episode(run_id, task_id);
  auto evaluators = records.list_evaluators(run_id);
  auto all_labels = labels_.read_all();

  json attempts = json::array();
  for (const auto& a : e.attempts) {
    Trajectory t = store_.load_trajectory(run_id, task_id, a.attempt_index);
    json steps = json::array();
    for (const auto& s : t.steps) {
      steps.push_back({{"index", s.index},
                       {"action", action_to_json(s.action)},
                       {"action_summary", describe(s.action)},
                       {"reasoning", s.reasoning},
                       {"screenshot", ref_json(s.post_screenshot)}});
    }
    json verdicts = json::object();
    for (const auto& ev : evaluators) {
      if (auto v = records.load_verdict(a.trajectory_id, ev)) verdicts[ev] = to_json(*v);
    }
    std::vector<HumanLabel> mine;
    for (const auto& l : all_labels) {
      if (l.trajectory_id == a.trajectory_id) mine.push_back(l);
    }
    json j{{"attempt_index", a.attempt_index},
           {"trajectory_id", a.trajectory_id},
           {"status", to_string(t.status)},
           {"steps", steps},
           {"final_screenshot", ref_json(t.final_screenshot)},
           {"verdict", to_json(a.verdict)},
           {"verdicts", verdicts},
           {"labels", labels_json(latest_labels(mine))},
           {"started_at", t.started_at},
           {"ended_at", t.ended_at}};
    if (t.initial_screenshot) j["initial_screenshot"] = ref_json(*t.initial_screenshot);
    if (a.feedback) j["feedback"] = *a.feedback;
    if (a.ground_truth) j["ground_truth"] = *a.ground_truth;
    if (t.final_reasoning) j["final_reasoning"] = *t.final_reasoning;
    if (t.error) j["error"] = *t.error;
    attempts.push_back(j);
  }
  json out{{"episode_id", e.episode_id},
           {"run_id", e.run_id},
           {"task_id", e.task_id},
           {"agent_id", e.agent_id},
           {"evaluator_id", e.evaluator_id},
           {"baseline_success", e.baseline_success},
           {"final_success", e.final_success},
           {"attempts", attempts}};
  if (e.ground_truth) out["ground_truth"] = *e.ground_truth;
  if (e.error) out["error"] = *e.error;
  auto descriptions = task_descriptions(records.load_run_manifest(run_id));
  if (auto it = descriptions.find(task_id); it != descriptions.end()) {
    out["task_description"] = it->second;
  }
  return json_response(200, out);
}

void ReviewApi::rebuild_screenshot_index() const {
  std::map<std::string, fs::path> index;
  for (const auto& run_id : store_.list_runs()) {
    if (!is_safe_id(run_id)) continue;
    for (const auto& task_id : store_.list_episode_tasks(run_id)) {
      if (!is_slug(task_id)) continue;
      for (int k : store_.list_attempts(run_id, task_id)) {
        fs::path dir = store_.attempt_dir(run_id, task_id, k);
        json m = json::parse(read_file(dir / "manifest.json"), nullptr, false);
        if (m.is_discarded()) continue;
        auto add = [&](const json& ref) {
          if (ref.is_object() && ref.contains("content_hash")) {
            index.emplace(ref.at("content_hash").get<std::string>(),
                          dir / ref.at("relative_path").get<std::string>());
          }
        };
        if (m.contains("initial_screenshot")) add(m.at("initial_screenshot"));
        if (m.contains("final_screenshot")) add(m.at("final_screenshot"));
        for (const auto& s : m.value("steps", json::array())) add(s.value("post_screenshot", json()));
      }
    }
  }
  screenshot_index_ = std::move(index);
}

std::optional<fs::path> ReviewApi::find_screenshot(const std::string& hash) const {
  std::lock_guard<std::mutex> lock(index_mu_);
  auto it = screenshot_index_.find(hash);
  if (it == screenshot_index_.end() || !fs::exists(it->second)) {
    rebuild_screenshot_index();
    it = screenshot_index_.find(hash);
    if (it == screenshot_index_.end()) return std::nullopt;
  }
  return it->second;
}

ApiResponse ReviewApi::screenshot(const std::string& hash) const {
  if (!is_hex_digest(hash)) return error_response(404, "not_found", "unknown screenshot");
  auto path = find_screenshot(hash);
  if (!path) return error_response(404, "not_found", "unknown screenshot " + hash);
  Bytes bytes = read_file_bytes(*path);
  if (sha256_hex(bytes) != hash) {
    return error_response(500, "integrity_error", "stored screenshot does not match " + hash);
  }
  ApiResponse r;
  r.content_type = "image/png";
  r.body.assign(bytes.begin(), bytes.end());
  r.headers["Cache-Control"] = "public, max-age=31536000, immutable";
  r.headers["ETag"] = "\"" + hash + "\"";
  return r;
}

ApiResponse ReviewApi::labels(const std::map<std::string, std::string>& query) const {
  auto it = query.find("trajectory");
  if (it == query.end() || it->second.empty()) {
    return error_response(400, "invalid_argument", "query parameter 'trajectory' is required");
  }
  if (!RunRecords(store_).trajectory_exists(it->second)) {
    return error_response(404, "not_found", "trajectory '" + it->second + "' not found");
  }
  return json_response(200, labels_json(labels_.latest_for(it->second)));
}

ApiResponse ReviewApi::submit_label(const std::string& body) const {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return error_response(400, "invalid_argument", "body must be a JSON object");
  }
  for (const char* key : {"trajectory_id", "label", "annotator_id"}) {
    if (!j.contains(key) || !j.at(key).is_string()) {
      return error_response(400, "invalid_argument", std::string("'") + key + "' must be a string");
    }
  }
  std::string annotator(trim(j.at("annotator_id").get<std::string>()));
  if (annotator.empty() || annotator.size() > 128 ||
      annotator.find_first_of("\r\n") != std::string::npos) {
    return error_response(400, "invalid_argument", "annotator_id must be a short non-empty line");
  }
  HumanLabel label;
  try {
    label.label = label_from_string(j.at("label").get<std::string>());
  } catch (const Error& e) {
    return error_response(400, "invalid_argument", e.what());
  }
  label.trajectory_id = j.at("trajectory_id").get<std::string>();
  if (!RunRecords(store_).trajectory_exists(label.trajectory_id)) {
    return error_response(404, "not_found", "trajectory '" + label.trajectory_id + "' not found");
  }
  label.task_id = parse_trajectory_id(label.trajectory_id).task_id;
  label.annotator_id = annotator;
  return json_response(201, to_json(labels_.append(label)));
}

ApiResponse ReviewApi::metrics(const std::string& run_id,
                               const std::map<std::string, std::string>& query) const {
  if (!is_safe_id(run_id) || !store_.has_run(run_id)) {
    return error_response(404, "not_found", "run '" + run_id + "' not found");
  }
  ReportOptions options;
  auto it = query.find("truth");
  options.truth = truth_source_from_string(it == query.end() ? "oracle" : it->second);
  options.human = adjudicate_labels(labels_.read_all());
  auto report = build_report({RunData::load(store_, run_id)}, options);
  return json_response(200, to_json(report));
}

ApiResponse ReviewApi::disagreements(const std::string& run_id,
                                     const std::map<std::string, std::string>& query) const {
  if (!is_safe_id(run_id) || !store_.has_run(run_id)) {
    return error_response(404, "not_found", "run '" + run_id + "' not found");
  }
  auto it = query.find("evaluator");
  if (it == query.end() || it->second.empty()) {
    return error_response(400, "invalid_argument", "query parameter 'evaluator' is required");
  }
  RunRecords records(store_);
  auto evaluators = records.list_evaluators(run_id);
  if (std::find(evaluators.begin(), evaluators.end(), it->second) == evaluators.end()) {
    return error_response(404, "not_found",
                          "evaluator '" + it->second + "' has no verdicts in run '" + run_id + "'");
  }
  auto verdicts = records.load_verdicts(run_id, it->second);
  auto latest = latest_labels(labels_.read_all());

  json arr = json::array();
  for (const auto& [trajectory_id, v] : verdicts) {  // ordered by task, then attempt
    if (v.is_error()) continue;
    std::vector<HumanLabel> mine;
    for (const auto& l : latest) {
      if (l.trajectory_id == trajectory_id) mine.push_back(l);
    }
    bool disagrees = std::any_of(mine.begin(), mine.end(), [&](const HumanLabel& l) {
      return (l.label == Label::kDone) != v.done;
    });
    if (!disagrees) continue;
    auto key = parse_trajectory_id(trajectory_id);
    arr.push_back({{"episode_id", make_episode_id(run_id, key.task_id)},
                   {"task_id", key.task_id},
                   {"trajectory_id", trajectory_id},
                   {"attempt_index", key.attempt_index},
                   {"verdict", to_json(v)},
                   {"labels", labels_json(mine)}});
  }
  std::stable_sort(arr.begin(), arr.end(), [](const json& a, const json& b) {
    return std::make_pair(a.at("task_id").get<std::string>(), a.at("attempt_index").get<int>()) <
           std::make_pair(b.at("task_id").get<std::string>(), b.at("attempt_index").get<int>());
  });
  return json_response(200, arr);
}

struct ReviewServer::Impl {
  std::shared_ptr<const ReviewApi> api;
  httplib::Server server;
  std::thread thread;
};

ReviewServer::ReviewServer(std::shared_ptr<const ReviewApi> api,
                           std::optional<fs::path> ui_dir)
    : impl_(std::make_unique<Impl>()) {
  impl_->api = std::move(api);
  auto handler = [api = impl_->api](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    ApiResponse r = api->handle(req.method, req.path, query, req.body);
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_content(r.body, r.content_type);
  };
  // The library default sets SO_REUSEPORT, which would let a second server
  // share a port that is already in use.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  impl_->server.Get(R"(/api/.*)", handler);
  impl_->server.Post(R"(/api/.*)", handler);
  if (ui_dir) {
    if (!impl_->server.set_mount_point("/", ui_dir->string())) {
      throw Error(ErrorCode::kNotFound, "UI asset directory " + ui_dir->string() + " not found");
    }
  }
}

ReviewServer::~ReviewServer() { stop(); }

void ReviewServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host);
    if (port_ < 0) throw Error(ErrorCode::kIo, "cannot bind " + host);
  } else {
    if (!impl_->server.bind_to_port(host, port)) {
      throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
    }
    port_ = port;
  }
}

void ReviewServer::start() {
  impl_->thread = std::thread([this] {
    if (!impl_->server.listen_after_bind()) spdlog::warn("review server stopped listening");
  });
  impl_->server.wait_until_ready();
}

void ReviewServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::pair<std::string, int> parse_bind_address(const std::string& text) {
  std::string host = "127.0.0.1";
  std::string port = text;
  auto colon = text.rfind(':');
  if (colon != std::string::npos) {
    host = text.substr(0, colon);
    port = text.substr(colon + 1);
    if (host.empty()) host = "127.0.0.1";
  }
  if (port.empty() || port.size() > 5 ||
      !std::all_of(port.begin(), port.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorCode::kInvalidArgument, "bad bind address '" + text + "'");
  }
  int p = std::stoi(port);
  if (p > 65535) throw Error(ErrorCode::kInvalidArgument, "port out of range in '" + text + "'");
  return {host, p};
}

}  // namespace cuaeval
