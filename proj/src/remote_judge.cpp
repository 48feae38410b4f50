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
#include <spdlog/spdlog.h>

#include "cuaeval/error.hpp"
#include "cuaeval/judge.hpp"
#include "cuaeval/util.hpp"
#include "internal/http_url.hpp"

namespace cuaeval {

using nlohmann::json;

RemoteJudge::RemoteJudge(RemoteJudgeConfig config)
    : config_(std::move(config)),
      limiter_(std::make_shared<RateLimiter>(config_.min_request_interval)) {
  internal::split_url(config_.endpoint_url);
  if (config_.request_retries < 0) {
    throw Error(ErrorCode::kInvalidArgument, "request_retries must be >= 0");
  }
}

json RemoteJudge::request_body(const Prompt& prompt) const {
  std::string data_uri = "data:" + prompt.image_mime + ";base64," + base64_encode(prompt.image);
  return {{"model", config_.model_name},
          {"temperature", 0},
          {"max_tokens", config_.max_output_tokens},
          {"messages",
           json::array({{{"role", "system"}, {"content", prompt.system_text}},
                        {{"role", "user"},
                         {"content", json::array({{{"type", "text"}, {"text", prompt.user_text}},
                                                  {{"type", "image_url"},
                                                   {"image_url", {{"url", data_uri}}}}})}}})}};
}

std::string RemoteJudge::response_text(const json& body) {
  auto join_parts = [](const json& content) -> std::optional<std::string> {
    if (content.is_string()) return content.get<std::string>();
    if (!content.is_array()) return std::nullopt;
    std::string out;
    for (const auto& part : content) {
      if (part.is_object() && part.value("type", "") == "text" && part.contains("text") &&
          part.at("text").is_string()) {
        out += part.at("text").get<std::string>();
      }
    }
    return out;
  };
  if (body.contains("choices") && body.at("choices").is_array() && !body.at("choices").empty()) {
    const json& first = body.at("choices")[0];
    if (first.contains("message") && first.at("message").contains("content")) {
      if (auto s = join_parts(first.at("message").at("content"))) return *s;
    }
  }
  if (body.contains("content")) {
    if (auto s = join_parts(body.at("content"))) return *s;
  }
  throw Error(ErrorCode::kParse, "response has no assistant text");
}

Verdict RemoteJudge::judge(const TaskSpec& task, const Screenshot& final_screenshot,
                           std::string_view) const {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start)
        .count();
  };
  auto failure = [&](const std::string& message) {
    Verdict v;
    v.evaluator_id = config_.evaluator_id;
    v.parse_path = ParsePath::kTransportError;
    v.prompt_template_version = kPromptTemplateVersion;
    v.error = message;
    v.latency_ms = elapsed();
    return v;
  };

  Prompt prompt = build_prompt(task.description, final_screenshot);
  const std::string body = request_body(prompt).dump();

  httplib::Headers headers;
  if (config_.api_key_env) {
    const char* key = std::getenv(config_.api_key_env->c_str());
    if (key == nullptr) return failure("environment variable " + *config_.api_key_env + " is not set");
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  auto url = internal::split_url(config_.endpoint_url);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  std::string last_error;
  for (int attempt = 0; attempt <= config_.request_retries; ++attempt) {
    limiter_->acquire();
    httplib::Client client(url.origin);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(url.path, headers, body, "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
    } else if (res->status < 200 || res->status >= 300) {
      last_error = "endpoint returned HTTP " + std::to_string(res->status);
    } else {
      Verdict v;
      json parsed = json::parse(res->body, nullptr, false);
      std::string text;
      try {
        if (parsed.is_discarded()) throw Error(ErrorCode::kParse, "body is not JSON");
        text = response_text(parsed);
      } catch (const Error& e) {
        v = parse_verdict("", config_.evaluator_id);
        v.raw_response = res->body;
        v.error = std::string("unreadable completion: ") + e.what();
        v.latency_ms = elapsed();
        return v;
      }
      v = parse_verdict(text, config_.evaluator_id);
      v.latency_ms = elapsed();
      return v;
    }
    spdlog::warn("judge {} attempt {} failed: {}", config_.evaluator_id, attempt + 1, last_error);
  }
  return failure(last_error + " after " + std::to_string(config_.request_retries + 1) +
                 " requests");
}

}  // namespace cuaeval
