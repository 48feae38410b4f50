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

#include "cuaeval/run_config.hpp"

#include <cstdlib>

#include "cuaeval/error.hpp"
#include "cuaeval/sim/predicate.hpp"
#include "cuaeval/util.hpp"

namespace cuaeval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kInvalidArgument, where + " is missing '" + key + "'");
  }
  return j.at(key);
}

std::string require_string(const json& j, const char* key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_string()) throw Error(ErrorCode::kInvalidArgument, where + "." + key + " must be a string");
  return v.get<std::string>();
}

template <typename T>
T number_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw Error(ErrorCode::kInvalidArgument, where + "." + key + " must be a number");
  return v.get<T>();
}

// Config values must never hold credentials.
void reject_secrets(const json& j, const std::string& where) {
  static const char* kSecretKeys[] = {"api_key", "apikey", "token", "secret", "password",
                                      "authorization"};
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      std::string lower = to_lower(k);
      for (const char* s : kSecretKeys) {
        if (lower == s && v.is_string()) {
          throw Error(ErrorCode::kInvalidArgument,
                      where + "." + k + ": secrets must come from an environment variable");
        }
      }
      reject_secrets(v, where + "." + k);
    }
  } else if (j.is_array()) {
    for (const auto& v : j) reject_secrets(v, where);
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

}  // namespace

std::shared_ptr<const Agent> make_agent(const json& spec, const fs::path& base_dir) {
  reject_secrets(spec, "agent");
  std::string kind = require_string(spec, "kind", "agent");
  if (kind == "scripted" || kind == "flaky") {
    fs::path script = resolve(base_dir, require_string(spec, "script", "agent"));
    if (!fs::exists(script)) {
      throw Error(ErrorCode::kNotFound, "agent script " + script.string() + " not found");
    }
    auto def = load_scripted_agent_def(script);
    if (auto id = optional_string(spec, "agent_id")) def.agent_id = *id;
    return std::make_shared<ScriptedAgent>(std::move(def), kind == "flaky");
  }
  if (kind == "remote") {
    RemoteAgentConfig c;
    c.agent_id = require_string(spec, "agent_id", "agent");
    c.endpoint_url = require_string(spec, "endpoint_url", "agent");
    c.auth_header_env = optional_string(spec, "auth_header_env");
    if (auto h = optional_string(spec, "auth_header_name")) c.auth_header_name = *h;
    c.timeout = std::chrono::milliseconds(number_or<std::int64_t>(spec, "timeout_ms", 60000, "agent"));
    if (!is_slug(c.agent_id)) {
      throw Error(ErrorCode::kInvalidArgument, "agent_id '" + c.agent_id + "' is not a slug");
    }
    return std::make_shared<RemoteAgent>(std::move(c));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown agent kind '" + kind + "'");
}

std::shared_ptr<const Judge> make_judge(const json& spec) {
  reject_secrets(spec, "judge");
  std::string kind = require_string(spec, "kind", "judge");
  std::string id = optional_string(spec, "evaluator_id").value_or("");
  if (!id.empty() && !is_safe_id(id)) {
    throw Error(ErrorCode::kInvalidArgument, "evaluator_id '" + id + "' is not a safe id");
  }
  if (kind == "oracle") return std::make_shared<OracleJudge>(id.empty() ? "oracle" : id);
  if (kind == "noisy") {
    json inner_spec = spec.value("inner", json{{"kind", "oracle"}});
    auto inner = make_judge(inner_spec);
    double p = number_or<double>(spec, "flip_probability", -1.0, "judge");
    if (!spec.contains("flip_probability")) {
      throw Error(ErrorCode::kInvalidArgument, "noisy judge needs 'flip_probability'");
    }
    auto seed = number_or<std::uint64_t>(spec, "seed", 0, "judge");
    return std::make_shared<NoisyJudge>(inner, p, seed, id);
  }
  if (kind == "remote") {
    RemoteJudgeConfig c;
    c.evaluator_id = require_string(spec, "evaluator_id", "judge");
    c.endpoint_url = require_string(spec, "endpoint_url", "judge");
    c.model_name = require_string(spec, "model", "judge");
    c.api_key_env = optional_string(spec, "api_key_env");
    c.max_output_tokens = number_or<int>(spec, "max_output_tokens", 256, "judge");
    c.timeout = std::chrono::milliseconds(number_or<std::int64_t>(spec, "timeout_ms", 120000, "judge"));
    c.request_retries = number_or<int>(spec, "request_retries", 2, "judge");
    c.min_request_interval =
        std::chrono::milliseconds(number_or<std::int64_t>(spec, "min_request_interval_ms", 0, "judge"));
    if (spec.contains("temperature") && spec.at("temperature") != 0) {
      throw Error(ErrorCode::kInvalidArgument, "judge temperature is fixed at 0");
    }
    return std::make_shared<RemoteJudge>(std::move(c));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown judge kind '" + kind + "'");
}

json RunConfig::snapshot() const {
  json j{{"corpus", corpus_dir.string()},
         {"sim_apps", sim_apps_dir.string()},
         {"store", store_root.string()},
         {"task_filter", filter.to_json()},
         {"seed", seed},
         {"agent", agent_spec},
         {"judge", judge_spec},
         {"max_retries", episode.max_retries},
         {"step_budget", episode.step_budget},
         {"parallelism", parallelism},
         {"screen", {{"width", screen.width}, {"height", screen.height}}}};
  if (limit) j["limit"] = *limit;
  if (run_id) j["run_id"] = *run_id;
  return j;
}

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "run config must be a JSON object");
  reject_secrets(j, "config");
  static const char* kKnown[] = {"corpus",      "sim_apps",    "store",       "task_filter",
                                 "limit",       "seed",        "agent",       "judge",
                                 "max_retries", "step_budget", "parallelism", "screen",
                                 "run_id"};
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* name : kKnown) known = known || k == name;
    if (!known) throw Error(ErrorCode::kInvalidArgument, "unknown config field '" + k + "'");
  }
  RunConfig c;
  c.base_dir = base_dir;
  c.corpus_dir = resolve(base_dir, require_string(j, "corpus", "config"));
  c.sim_apps_dir = resolve(base_dir, require_string(j, "sim_apps", "config"));
  c.store_root = resolve(base_dir, j.value("store", std::string("store")));
  c.filter = TaskFilter::from_json(j.value("task_filter", json()));
  if (j.contains("limit") && !j.at("limit").is_null()) {
    if (!j.at("limit").is_number_unsigned() || j.at("limit").get<std::size_t>() == 0) {
      throw Error(ErrorCode::kInvalidArgument, "config.limit must be a positive integer");
    }
    c.limit = j.at("limit").get<std::size_t>();
  }
  c.seed = number_or<std::uint64_t>(j, "seed", 0, "config");
  c.agent_spec = require(j, "agent", "config");
  c.judge_spec = require(j, "judge", "config");
  c.episode.max_retries = number_or<int>(j, "max_retries", 1, "config");
  c.episode.step_budget = number_or<int>(j, "step_budget", 25, "config");
  c.parallelism = number_or<int>(j, "parallelism", 1, "config");
  if (j.contains("screen")) {
    c.screen.width = number_or<int>(j.at("screen"), "width", 1280, "config.screen");
    c.screen.height = number_or<int>(j.at("screen"), "height", 800, "config.screen");
  }
  if (auto id = optional_string(j, "run_id")) {
    if (!is_safe_id(*id)) throw Error(ErrorCode::kInvalidArgument, "run_id '" + *id + "' is not a safe id");
    c.run_id = *id;
  }
  validate(c.episode);
  if (c.parallelism < 1) throw Error(ErrorCode::kInvalidArgument, "parallelism must be >= 1");
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::kNotFound, "config " + path.string() + " not found");
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  RunConfig c = run_config_from_json(j, path.parent_path());
  c.source = path;
  return c;
}

PreparedRun prepare_run(const RunConfig& config) {
  PreparedRun run;
  run.config = config;
  if (!fs::is_directory(config.corpus_dir)) {
    throw Error(ErrorCode::kNotFound, "corpus directory " + config.corpus_dir.string() + " not found");
  }
  if (!fs::is_directory(config.sim_apps_dir)) {
    throw Error(ErrorCode::kNotFound,
                "sim app directory " + config.sim_apps_dir.string() + " not found");
  }
  run.corpus = load_corpus(config.corpus_dir);
  run.apps = std::make_shared<const sim::AppRegistry>(
      sim::load_app_defs(config.sim_apps_dir, config.screen));
  run.tasks = select_tasks(run.corpus, config.filter, config.seed, config.limit);
  for (const auto& t : run.tasks) {
    if (!run.apps->contains(t.app_id)) {
      throw Error(ErrorCode::kFailedPrecondition,
                  "task '" + t.task_id + "' targets app '" + t.app_id + "' with no simulated definition");
    }
    if (t.goal_predicate) {
      auto problems = sim::closure_problems(sim::GoalPredicate::parse(*t.goal_predicate), *run.apps);
      if (!problems.empty()) {
        throw Error(ErrorCode::kFailedPrecondition,
                    "task '" + t.task_id + "' predicate does not resolve: " + problems.front());
      }
    }
  }
  run.agent = make_agent(config.agent_spec, config.base_dir);
  run.judge = make_judge(config.judge_spec);
  std::string kind = config.judge_spec.value("kind", "");
  bool needs_predicate =
      kind == "oracle" ||
      (kind == "noisy" && config.judge_spec.value("inner", json{{"kind", "oracle"}}).value("kind", "") == "oracle");
  if (needs_predicate) {
    for (const auto& t : run.tasks) {
      if (!t.goal_predicate) {
        throw Error(ErrorCode::kFailedPrecondition,
                    "oracle judging needs a goal predicate on task '" + t.task_id + "'");
      }
    }
  }
  return run;
}

BenchmarkResult execute_run(const PreparedRun& run, TrajectoryStore& store) {
  BenchmarkOptions options;
  options.run_id = run.config.run_id.value_or(generate_run_id());
  options.episode = run.config.episode;
  options.parallelism = run.config.parallelism;
  options.config_snapshot = run.config.snapshot();
  options.corpus_hash = corpus_hash(run.corpus);
  return run_benchmark(run.tasks, *run.agent, *run.judge, sim_environment_factory(run.apps),
                       options, store);
}

}  // namespace cuaeval
