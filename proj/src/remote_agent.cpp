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

#include <cstdlib>

#include <httplib.h>

#include "cuaeval/agent.hpp"
#include "cuaeval/util.hpp"
#include "internal/http_url.hpp"

namespace cuaeval {

using nlohmann::json;

RemoteAgent::RemoteAgent(RemoteAgentConfig config) : config_(std::move(config)) {
  internal::split_url(config_.endpoint_url);  // fail fast on a bad url
}

json RemoteAgent::request_body(const AgentObservation& obs) {
  json history = json::array();
  for (const auto& a : obs.step_history) history.push_back(action_to_json(a));
  json body{{"task_description", obs.task_description},
            {"screenshot", base64_encode(obs.screenshot.png)},
            {"step_history", history},
            {"steps_remaining", obs.steps_remaining}};
  if (obs.feedback) body["feedback"] = *obs.feedback;
  return body;
}

AgentDecision RemoteAgent::next_decision(const AgentObservation& obs) const {
  auto url = internal::split_url(config_.endpoint_url);
  httplib::Client client(url.origin);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (config_.auth_header_env) {
    const char* value = std::getenv(config_.auth_header_env->c_str());
    if (value == nullptr) {
      throw AgentError("environment variable " + *config_.auth_header_env + " is not set");
    }
    headers.emplace(config_.auth_header_name, value);
  }
  auto res = client.Post(url.path, headers, request_body(obs).dump(), "application/json");
  if (!res) {
    throw AgentError("agent endpoint request failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw AgentError("agent endpoint returned HTTP " + std::to_string(res->status));
  }
  json body = json::parse(res->body, nullptr, false);
  if (body.is_discarded()) throw AgentError("agent endpoint returned a non-JSON body");
  try {
    return decision_from_json(body);
  } catch (const Error& e) {
    throw AgentError(std::string("malformed agent response: ") + e.what());
  }
}

}  // namespace cuaeval
