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

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuaeval/action.hpp"
#include "cuaeval/error.hpp"
#include "cuaeval/corpus.hpp"
#include "cuaeval/sim/environment.hpp"
#include "cuaeval/trajectory_store.hpp"

namespace cuaeval {

struct Act {
  ActionRecord action;
  std::string reasoning;
  bool operator==(const Act&) const = default;
};

struct DeclareDone {
  std::string reasoning;
  bool operator==(const DeclareDone&) const = default;
};

using AgentDecision = std::variant<Act, DeclareDone>;

nlohmann::json decision_to_json(const AgentDecision& d);
/// {"act": {...action...}, "reasoning": ...} or {"declare_done": true, ...}.
AgentDecision decision_from_json(const nlohmann::json& j);

struct AgentObservation {
  std::string task_id;
  std::string task_description;
  std::optional<std::string> feedback;  // absent on attempt 0
  Screenshot screenshot;
  std::vector<ActionRecord> step_history;  // this attempt only
  int steps_remaining = 0;
  int attempt_index = 0;
};

// Thrown by agents for failures that end the attempt as agent_error.
class AgentError : public Error {
 public:
  explicit AgentError(const std::string& message) : Error(ErrorCode::kTransport, message) {}
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual const std::string& id() const = 0;
  /// Must be safe to call from concurrent episodes.
  virtual AgentDecision next_decision(const AgentObservation& obs) const = 0;
};

struct ScriptedTask {
  std::vector<AgentDecision> base_script;
  std::optional<std::vector<AgentDecision>> feedback_script;
};

struct ScriptedAgentDef {
  std::string agent_id;
  std::map<std::string, ScriptedTask> tasks;
};

ScriptedAgentDef scripted_agent_def_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScriptedAgentDef& def);
ScriptedAgentDef load_scripted_agent_def(const std::filesystem::path& path);

// Replays a fixed script per task. With `use_feedback`, observations that
// carry feedback select the task's feedback_script when one exists.
class ScriptedAgent final : public Agent {
 public:
  ScriptedAgent(ScriptedAgentDef def, bool use_feedback);

  const std::string& id() const override { return def_.agent_id; }
  AgentDecision next_decision(const AgentObservation& obs) const override;

 private:
  ScriptedAgentDef def_;
  bool use_feedback_;
};

struct RemoteAgentConfig {
  std::string agent_id;
  std::string endpoint_url;
  std::optional<std::string> auth_header_env;  // env var holding the header value
  std::string auth_header_name = "Authorization";
  std::chrono::milliseconds timeout{60000};
};

// One POST per decision; holds no session state.
class RemoteAgent final : public Agent {
 public:
  explicit RemoteAgent(RemoteAgentConfig config);

  const std::string& id() const override { return config_.agent_id; }
  AgentDecision next_decision(const AgentObservation& obs) const override;

  static nlohmann::json request_body(const AgentObservation& obs);

 private:
  RemoteAgentConfig config_;
};

struct AttemptResult {
  Trajectory trajectory;
  // Frames bracketing the attempt, sidecar included for simulated screens.
  Screenshot opening;
  Screenshot closing;
  std::optional<std::string> feedback_seen;
};

/// Drives one attempt from the environment's current state. Agent failures and
/// out-of-bounds actions finalize the trajectory with agent_error.
AttemptResult run_attempt(const Agent& agent, Environment& env, const TaskSpec& task,
                          const std::optional<std::string>& feedback, int step_budget,
                          TrajectoryHandle handle, int attempt_index);

}  // namespace cuaeval
