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

#include "cuaeval/judge.hpp"

#include <array>
#include <cctype>
#include <thread>

#include "cuaeval/error.hpp"
#include "cuaeval/sim/predicate.hpp"
#include "cuaeval/sim/render.hpp"
#include "cuaeval/sim/state.hpp"
#include "cuaeval/util.hpp"

namespace cuaeval {

using nlohmann::json;

const char* to_string(ParsePath p) {
  switch (p) {
    case ParsePath::kStrictJson: return "strict_json";
    case ParsePath::kKeywordFallback: return "keyword_fallback";
    case ParsePath::kOracle: return "oracle";
    case ParsePath::kSynthetic: return "synthetic";
    case ParsePath::kParseError: return "parse_error";
    case ParsePath::kTransportError: return "transport_error";
  }
  return "parse_error";
}

ParsePath parse_path_from_string(const std::string& s) {
  static const std::array<ParsePath, 6> all = {
      ParsePath::kStrictJson, ParsePath::kKeywordFallback, ParsePath::kOracle,
      ParsePath::kSynthetic,  ParsePath::kParseError,      ParsePath::kTransportError};
  for (auto p : all) {
    if (s == to_string(p)) return p;
  }
  throw Error(ErrorCode::kParse, "unknown parse_path '" + s + "'");
}

json to_json(const Verdict& v) {
  json j{{"done", v.is_error() ? json(nullptr) : json(v.done)},
         {"rationale", v.rationale},
         {"evaluator_id", v.evaluator_id},
         {"raw_response", v.raw_response},
         {"parse_path", to_string(v.parse_path)},
         {"latency_ms", v.latency_ms},
         {"prompt_template_version", v.prompt_template_version}};
  if (v.error) j["error"] = *v.error;
  return j;
}

Verdict verdict_from_json(const json& j) {
  try {
    Verdict v;
    v.parse_path = parse_path_from_string(j.at("parse_path").get<std::string>());
    v.done = j.at("done").is_boolean() ? j.at("done").get<bool>() : false;
    if (!v.is_error() && !j.at("done").is_boolean()) {
      throw Error(ErrorCode::kParse, "verdict without a boolean 'done'");
    }
    v.rationale = j.at("rationale").get<std::string>();
    v.evaluator_id = j.at("evaluator_id").get<std::string>();
    v.raw_response = j.value("raw_response", "");
    v.latency_ms = j.value("latency_ms", std::int64_t{0});
    v.prompt_template_version = j.value("prompt_template_version", "");
    if (j.contains("error") && j.at("error").is_string()) {
      v.error = j.at("error").get<std::string>();
    }
    return v;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed verdict: ") + e.what());
  }
}

namespace {

// End of the balanced {...} starting at `open`, honouring JSON strings.
std::optional<std::size_t> object_end(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::nullopt;
}

std::optional<std::pair<bool, std::string>> strict_candidate(std::string_view raw) {
  for (std::size_t i = raw.find('{'); i != std::string_view::npos; i = raw.find('{', i + 1)) {
    auto end = object_end(raw, i);
    if (!end) continue;
    json j = json::parse(raw.substr(i, *end - i + 1), nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    auto done = j.find("done");
    auto reason = j.find("reason");
    if (done == j.end() || reason == j.end() || !done->is_boolean() || !reason->is_string()) {
      continue;
    }
    return std::make_pair(done->get<bool>(), reason->get<std::string>());
  }
  return std::nullopt;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Length of `keyword` at the start of `text` as a whole word, else 0. Runs of
// whitespace in the keyword match any whitespace run.
std::size_t match_keyword(std::string_view text, std::string_view keyword) {
  std::size_t i = 0, k = 0;
  while (k < keyword.size()) {
    if (keyword[k] == ' ') {
      if (i >= text.size() || !std::isspace(static_cast<unsigned char>(text[i]))) return 0;
      while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      ++k;
      continue;
    }
    if (i >= text.size() ||
        std::tolower(static_cast<unsigned char>(text[i])) != keyword[k]) {
      return 0;
    }
    ++i;
    ++k;
  }
  if (i < text.size() && is_word_char(text[i])) return 0;
  return i;
}

struct Keyword {
  std::string_view word;
  bool done;
};

// Negative forms first so "not done" never reads as "done".
constexpr std::array<Keyword, 7> kKeywords = {{{"not done", false},
                                               {"not_done", false},
                                               {"incomplete", false},
                                               {"no", false},
                                               {"done", true},
                                               {"complete", true},
                                               {"yes", true}}};

std::string_view strip_lead(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && !std::isalnum(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

}  // namespace

Verdict parse_verdict(std::string_view raw, const std::string& evaluator_id) {
  Verdict v;
  v.evaluator_id = evaluator_id;
  v.raw_response = std::string(raw);
  v.prompt_template_version = kPromptTemplateVersion;
  const std::string trimmed(trim(raw));

  if (auto strict = strict_candidate(raw)) {
    v.parse_path = ParsePath::kStrictJson;
    v.done = strict->first;
    v.rationale = std::string(trim(strict->second));
    if (v.rationale.empty() && !v.done) v.rationale = trimmed;
    return v;
  }

  // An object that fails the contract is malformed, not prose. Reading its
  // keys as keywords would turn {"done": "no"} into done=true.
  if (!trimmed.empty() && trimmed.front() == '{') {
    v.parse_path = ParsePath::kParseError;
    v.error = "response is a JSON object without a boolean 'done' and string 'reason'";
    return v;
  }
  std::string_view body = strip_lead(trimmed);
  for (const auto& kw : kKeywords) {
    std::size_t n = match_keyword(body, kw.word);
    if (n == 0) continue;
    v.parse_path = ParsePath::kKeywordFallback;
    v.done = kw.done;
    v.rationale = std::string(trim(strip_lead(body.substr(n))));
    if (v.rationale.empty() && !v.done) v.rationale = trimmed;
    return v;
  }

  v.parse_path = ParsePath::kParseError;
  v.error = "response matched neither the JSON contract nor a leading keyword";
  return v;
}

Prompt build_prompt(const std::string& task_description, const Screenshot& screenshot) {
  if (trim(task_description).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "task description is empty");
  }
  sim::inspect_png(screenshot.png);
  Prompt p;
  p.template_version = kPromptTemplateVersion;
  p.system_text =
      "You are a strict auditor of GUI tasks performed on a desktop computer. "
      "You receive a task and a single screenshot of the screen after an agent "
      "stopped working on it. Judge only from what is visible in the screenshot. "
      "If the evidence does not clearly show the task as completed, it is not done.";
  p.user_text = "Task: " + task_description +
                "\n\nThe attached image is the final state of the screen. Has the task "
                "been completed?\nAnswer with JSON {\"done\": true or false, \"reason\": "
                "\"short explanation of the visible evidence\"}.";
  p.image = screenshot.png;
  return p;
}

std::string judge_sample_key(const std::string& task_id, int attempt_index) {
  return task_id + "#" + std::to_string(attempt_index);
}

OracleJudge::OracleJudge(std::string evaluator_id) : id_(std::move(evaluator_id)) {}

namespace {

std::string describe_status(const sim::AtomStatus& s, const sim::SimDesktopState& state) {
  std::string text = (s.wanted ? "" : "not ") + sim::to_string(s.atom);
  if (const auto* f = std::get_if<sim::FieldAtom>(&s.atom)) {
    auto app = state.app_states.find(f->app);
    if (app != state.app_states.end()) {
      auto field = app->second.find(f->field);
      if (field != app->second.end()) text += " (currently " + field->second + ")";
    }
  } else {
    text += " (currently " + state.focused_app + ")";
  }
  return text;
}

}  // namespace

Verdict OracleJudge::judge(const TaskSpec& task, const Screenshot& final_screenshot,
                           std::string_view) const {
  if (!task.goal_predicate) {
    throw Error(ErrorCode::kFailedPrecondition,
                "task '" + task.task_id + "' has no goal predicate");
  }
  if (!final_screenshot.state_sidecar) {
    throw Error(ErrorCode::kFailedPrecondition, "screenshot carries no state sidecar");
  }
  auto state = sim::from_sidecar(*final_screenshot.state_sidecar);
  auto predicate = sim::GoalPredicate::parse(*task.goal_predicate);

  Verdict v;
  v.evaluator_id = id_;
  v.parse_path = ParsePath::kOracle;
  v.prompt_template_version = "oracle";
  v.done = sim::check_goal(state, predicate);
  std::string listed;
  for (const auto& s : sim::atom_statuses(state, predicate)) {
    if (s.satisfied() != v.done) continue;
    if (!listed.empty()) listed += "; ";
    listed += describe_status(s, state);
  }
  v.rationale = v.done ? "Goal conditions hold: " + listed
                       : "Unmet goal conditions: " + listed;
  v.raw_response = v.rationale;
  return v;
}

NoisyJudge::NoisyJudge(std::shared_ptr<const Judge> inner, double flip_probability,
                       std::uint64_t seed, std::string evaluator_id)
    : inner_(std::move(inner)), p_(flip_probability), seed_(seed), id_(std::move(evaluator_id)) {
  if (!inner_) throw Error(ErrorCode::kInvalidArgument, "noisy judge needs an inner judge");
  if (!(p_ >= 0.0 && p_ <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "flip probability must lie in [0, 1]");
  }
  if (id_.empty()) id_ = "noisy-" + inner_->evaluator_id();
}

double NoisyJudge::draw(std::uint64_t seed, std::string_view sample_key) {
  std::string material = std::to_string(seed) + ":" + std::string(sample_key);
  std::string hex = sha256_hex(material);
  std::uint64_t bits = std::stoull(hex.substr(0, 16), nullptr, 16);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

Verdict NoisyJudge::judge(const TaskSpec& task, const Screenshot& final_screenshot,
                          std::string_view sample_key) const {
  Verdict v = inner_->judge(task, final_screenshot, sample_key);
  v.evaluator_id = id_;
  if (v.is_error()) return v;
  if (draw(seed_, sample_key) < p_) {
    v.done = !v.done;
    v.parse_path = ParsePath::kSynthetic;
    v.rationale = "Synthetic flip of the " + inner_->evaluator_id() + " verdict. " + v.rationale;
  }
  return v;
}

void RateLimiter::acquire() {
  if (interval_.count() <= 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

}  // namespace cuaeval
