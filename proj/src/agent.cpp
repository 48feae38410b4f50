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

#include "cuaeval/agent.hpp"

#include "cuaeval/util.hpp"

namespace cuaeval {

using nlohmann::json;

json decision_to_json(const AgentDecision& d) {
  if (const auto* act = std::get_if<Act>(&d)) {
    return {{"act", action_to_json(act->action)}, {"reasoning", act->reasoning}};
  }
  return {{"declare_done", true}, {"reasoning", std::get<DeclareDone>(d).reasoning}};
}

AgentDecision decision_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "decision must be a JSON object");
  std::string reasoning;
  if (j.contains("reasoning")) {
    if (!j.at("reasoning").is_string()) {
      throw Error(ErrorCode::kParse, "decision 'reasoning' must be a string");
    }
    reasoning = j.at("reasoning").get<std::string>();
  }
  bool has_act = j.contains("act") || j.contains("action");
  bool done = j.contains("declare_done") && j.at("declare_done").is_boolean() &&
              j.at("declare_done").get<bool>();
  if (has_act == done) {
    throw Error(ErrorCode::kParse, "decision needs exactly one of 'act' or 'declare_done'");
  }
  if (done) return DeclareDone{reasoning};
  const json& a = j.contains("act") ? j.at("act") : j.at("action");
  return Act{action_from_json(a), reasoning};
}

namespace {

std::vector<AgentDecision> script_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorCode::kParse, where + " must be an array");
  std::vector<AgentDecision> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      out.push_back(decision_from_json(j[i]));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, where + "[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return out;
}

json script_to_json(const std::vector<AgentDecision>& script) {
  json arr = json::array();
  for (const auto& d : script) arr.push_back(decision_to_json(d));
  return arr;
}

}  // namespace

ScriptedAgentDef scripted_agent_def_from_json(const json& j) {
  if (!j.is_object() || !j.contains("agent_id") || !j.at("agent_id").is_string()) {
    throw Error(ErrorCode::kParse, "agent definition needs a string 'agent_id'");
  }
  ScriptedAgentDef def;
  def.agent_id = j.at("agent_id").get<std::string>();
  if (!is_slug(def.agent_id)) {
    throw Error(ErrorCode::kInvalidArgument, "agent_id '" + def.agent_id + "' is not a slug");
  }
  if (!j.contains("tasks") || !j.at("tasks").is_object()) {
    throw Error(ErrorCode::kParse, "agent definition needs a 'tasks' object");
  }
  for (const auto& [task_id, t] : j.at("tasks").items()) {
    ScriptedTask task;
    task.base_script = script_from_json(t.value("base_script", json::array()),
                                        task_id + ".base_script");
    if (t.contains("feedback_script")) {
      task.feedback_script = script_from_json(t.at("feedback_script"),
                                              task_id + ".feedback_script");
    }
    def.tasks.emplace(task_id, std::move(task));
  }
  return def;
}

json to_json(const ScriptedAgentDef& def) {
  json tasks = json::object();
  for (const auto& [task_id, t] : def.tasks) {
    json entry{{"base_script", script_to_json(t.base_script)}};
    if (t.feedback_script) entry["feedback_script"] = script_to_json(*t.feedback_script);
    tasks[task_id] = entry;
  }
  return {{"agent_id", def.agent_id}, {"tasks", tasks}};
}

ScriptedAgentDef load_scripted_agent_def(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  try {
    return scripted_agent_def_from_json(j);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

ScriptedAgent::ScriptedAgent(ScriptedAgentDef def, bool use_feedback)
    : def_(std::move(def)), use_feedback_(use_feedback) {}

AgentDecision ScriptedAgent::next_decision(const AgentObservation& obs) const {
  auto it = def_.tasks.find(obs.task_id);
  if (it == def_.tasks.end()) {
    // No script for this task: give up at once.
    return DeclareDone{""};
  }
  const ScriptedTask& task = it->second;
  const auto& script = (use_feedback_ && obs.feedback && task.feedback_script)
                           ? *task.feedback_script
                           : task.base_script;
  if (script.empty()) return DeclareDone{""};
  std::size_t i = obs.step_history.size();
  if (i >= script.size()) {
    throw AgentError("script for task '" + obs.task_id + "' exhausted after " +
                     std::to_string(script.size()) + " decisions");
  }
  return script[i];
}

AttemptResult run_attempt(const Agent& agent, Environment& env, const TaskSpec& task,
                          const std::optional<std::string>& feedback, int step_budget,
                          TrajectoryHandle handle, int attempt_index) {
  if (step_budget < 1) throw Error(ErrorCode::kInvalidArgument, "step_budget must be >= 1");
  AttemptResult result;
  result.feedback_seen = feedback;
  result.opening = env.capture();
  if (attempt_index == 0) handle.set_initial_screenshot(result.opening);

  AgentObservation obs;
  obs.task_id = task.task_id;
  obs.task_description = task.description;
  obs.feedback = feedback;
  obs.screenshot = result.opening;
  obs.attempt_index = attempt_index;

  auto finish = [&](TrajectoryStatus status, std::optional<std::string> reasoning,
                    std::optional<std::string> error) {
    result.closing = env.capture();
    result.trajectory =
        handle.finalize(result.closing, status, std::move(reasoning), std::move(error));
    return std::move(result);
  };

  for (int steps = 0;; ++steps) {
    if (steps >= step_budget) return finish(TrajectoryStatus::kBudgetExhausted, {}, {});
    obs.steps_remaining = step_budget - steps;
    AgentDecision decision;
    try {
      decision = agent.next_decision(obs);
    } catch (const std::exception& e) {
      return finish(TrajectoryStatus::kAgentError, {}, std::string(e.what()));
    }
    if (auto* done = std::get_if<DeclareDone>(&decision)) {
      return finish(TrajectoryStatus::kCompletedDeclaration, done->reasoning, {});
    }
    auto& act = std::get<Act>(decision);
    Screenshot shot;
    try {
      validate_action(act.action, env.bounds());
      shot = env.apply(act.action);
    } catch (const Error& e) {
      return finish(TrajectoryStatus::kAgentError, {},
                    "rejected action " + describe(act.action) + ": " + e.what());
    }
    handle.append_step(act.action, act.reasoning, shot);
    obs.step_history.push_back(act.action);
    obs.screenshot = std::move(shot);
  }
}

}  // namespace cuaeval
