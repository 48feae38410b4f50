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

// Outcome evaluators. A judge sees the task and one final screenshot and
// nothing else from the attempt.

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cuaeval/action.hpp"
#include "cuaeval/corpus.hpp"

namespace cuaeval {

inline constexpr const char* kPromptTemplateVersion = "v1";

enum class ParsePath {
  kStrictJson,
  kKeywordFallback,
  kOracle,
  kSynthetic,
  kParseError,
  kTransportError,
};

const char* to_string(ParsePath p);
ParsePath parse_path_from_string(const std::string& s);

struct Verdict {
  bool done = false;
  std::string rationale;
  std::string evaluator_id;
  std::string raw_response;
  ParsePath parse_path = ParsePath::kParseError;
  std::int64_t latency_ms = 0;
  std::string prompt_template_version;
  std::optional<std::string> error;

  /// parse_error and transport_error carry no usable done flag.
  bool is_error() const {
    return parse_path == ParsePath::kParseError || parse_path == ParsePath::kTransportError;
  }
  bool operator==(const Verdict&) const = default;
};

/// Error verdicts serialize "done" as null.
nlohmann::json to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

/// Total: every input lands on strict_json, keyword_fallback or parse_error.
Verdict parse_verdict(std::string_view raw, const std::string& evaluator_id);

struct Prompt {
  std::string system_text;
  std::string user_text;
  std::string image_mime = "image/png";
  Bytes image;
  std::string template_version;
};

/// Throws kInvalidArgument on an empty description and kParse on an image
/// that does not decode as PNG.
Prompt build_prompt(const std::string& task_description, const Screenshot& screenshot);

class Judge {
 public:
  virtual ~Judge() = default;
  virtual const std::string& evaluator_id() const = 0;
  /// `sample_key` identifies the judged item for seeded judges; it must not
  /// depend on the run identity so that replays agree.
  virtual Verdict judge(const TaskSpec& task, const Screenshot& final_screenshot,
                        std::string_view sample_key) const = 0;
};

/// "<task_id>#<attempt_index>"
std::string judge_sample_key(const std::string& task_id, int attempt_index);

// Reads the state sidecar and checks the task's goal predicate.
class OracleJudge final : public Judge {
 public:
  explicit OracleJudge(std::string evaluator_id = "oracle");

  const std::string& evaluator_id() const override { return id_; }
  /// Throws kFailedPrecondition without a predicate or sidecar.
  Verdict judge(const TaskSpec& task, const Screenshot& final_screenshot,
                std::string_view sample_key) const override;

 private:
  std::string id_;
};

// Flips the inner verdict with probability p, seeded per (seed, sample_key).
class NoisyJudge final : public Judge {
 public:
  NoisyJudge(std::shared_ptr<const Judge> inner, double flip_probability, std::uint64_t seed,
             std::string evaluator_id = "");

  const std::string& evaluator_id() const override { return id_; }
  Verdict judge(const TaskSpec& task, const Screenshot& final_screenshot,
                std::string_view sample_key) const override;

  /// Deterministic uniform draw in [0, 1) for a key.
  static double draw(std::uint64_t seed, std::string_view sample_key);

 private:
  std::shared_ptr<const Judge> inner_;
  double p_;
  std::uint64_t seed_;
  std::string id_;
};

struct RemoteJudgeConfig {
  std::string evaluator_id;
  std::string endpoint_url;
  std::string model_name;
  std::optional<std::string> api_key_env;
  int max_output_tokens = 256;
  std::chrono::milliseconds timeout{120000};
  int request_retries = 2;
  std::chrono::milliseconds min_request_interval{0};
};

// Minimum spacing between requests to one endpoint, shared across threads.
class RateLimiter {
 public:
  explicit RateLimiter(std::chrono::milliseconds min_interval) : interval_(min_interval) {}
  void acquire();

 private:
  std::chrono::milliseconds interval_;
  std::mutex mu_;
  std::chrono::steady_clock::time_point next_{};
};

class RemoteJudge final : public Judge {
 public:
  explicit RemoteJudge(RemoteJudgeConfig config);

  const std::string& evaluator_id() const override { return config_.evaluator_id; }
  /// Transport failures come back as transport_error verdicts, not exceptions.
  Verdict judge(const TaskSpec& task, const Screenshot& final_screenshot,
                std::string_view sample_key) const override;

  /// Chat-completion request body for a prompt (temperature 0).
  nlohmann::json request_body(const Prompt& prompt) const;
  /// Extracts the assistant text from a chat-completion response.
  static std::string response_text(const nlohmann::json& body);

 private:
  RemoteJudgeConfig config_;
  std::shared_ptr<RateLimiter> limiter_;
};

}  // namespace cuaeval
