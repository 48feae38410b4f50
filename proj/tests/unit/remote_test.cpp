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

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "cuaeval/agent.hpp"
#include "cuaeval/error.hpp"
#include "cuaeval/judge.hpp"
#include "cuaeval/sim/desktop.hpp"
#include "cuaeval/sim/render.hpp"
#include "test_support.hpp"

namespace cuaeval {
namespace {

using nlohmann::json;

// A local HTTP endpoint on an ephemeral port.
class FakeEndpoint {
 public:
  explicit FakeEndpoint(httplib::Server::Handler handler) {
    server_.Post("/v1/chat", [this, handler](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      {
        std::lock_guard lock(mu_);
        last_body_ = req.body;
        last_auth_ = req.get_header_value("Authorization");
        last_custom_ = req.get_header_value("X-Agent-Key");
      }
      handler(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat"; }
  int hits() const { return hits_; }
  json last_body() const {
    std::lock_guard lock(mu_);
    return json::parse(last_body_);
  }
  std::string last_auth() const {
    std::lock_guard lock(mu_);
    return last_auth_;
  }
  std::string last_custom() const {
    std::lock_guard lock(mu_);
    return last_custom_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  mutable std::mutex mu_;
  std::string last_body_, last_auth_, last_custom_;
};

json completion(const std::string& text) {
  return {{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", text}}}}})}};
}

Screenshot sample_shot() {
  const auto& apps = *testing::sample_apps();
  return sim::render(sim::reset(testing::sample_task("settings-wifi-off"), apps), apps);
}

RemoteJudgeConfig judge_config(const std::string& url, int retries = 0) {
  RemoteJudgeConfig c;
  c.evaluator_id = "vlm";
  c.endpoint_url = url;
  c.model_name = "test-model";
  c.timeout = std::chrono::milliseconds(2000);
  c.request_retries = retries;
  return c;
}

TEST(RemoteJudge, ParsesCompletionAndSendsContract) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion(R"({"done": true, "reason": "Wi-Fi shows off"})").dump(),
                    "application/json");
  });
  ::setenv("CUAEVAL_TEST_JUDGE_KEY", "sekrit", 1);
  auto cfg = judge_config(ep.url());
  cfg.api_key_env = "CUAEVAL_TEST_JUDGE_KEY";
  RemoteJudge judge(cfg);
  Screenshot shot = sample_shot();
  Verdict v = judge.judge(testing::sample_task("settings-wifi-off"), shot, "k");
  EXPECT_EQ(v.parse_path, ParsePath::kStrictJson);
  EXPECT_TRUE(v.done);
  EXPECT_EQ(v.rationale, "Wi-Fi shows off");
  EXPECT_EQ(v.evaluator_id, "vlm");
  EXPECT_EQ(ep.last_auth(), "Bearer sekrit");
  json body = ep.last_body();
  EXPECT_EQ(body.at("temperature"), 0);
  EXPECT_EQ(body.at("model"), "test-model");
  const auto& content = body.at("messages")[1].at("content");
  EXPECT_NE(content[0].at("text").get<std::string>().find("Task: Turn Wi-Fi off."), std::string::npos);
  EXPECT_EQ(content[1].at("image_url").at("url").get<std::string>(),
            "data:image/png;base64," + base64_encode(shot.png));
}

TEST(RemoteJudge, RetriesThenSucceeds) {
  std::atomic<int> calls{0};
  FakeEndpoint ep([&](const httplib::Request&, httplib::Response& res) {
    if (calls++ < 2) {
      res.status = 503;
      return;
    }
    res.set_content(completion("Not done: theme is light").dump(), "application/json");
  });
  RemoteJudge judge(judge_config(ep.url(), 2));
  Verdict v = judge.judge(testing::sample_task("settings-wifi-off"), sample_shot(), "k");
  EXPECT_EQ(ep.hits(), 3);
  EXPECT_EQ(v.parse_path, ParsePath::kKeywordFallback);
  EXPECT_FALSE(v.done);
}

TEST(RemoteJudge, ExhaustedRetriesGiveTransportError) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  RemoteJudge judge(judge_config(ep.url(), 1));
  Verdict v = judge.judge(testing::sample_task("settings-wifi-off"), sample_shot(), "k");
  EXPECT_EQ(ep.hits(), 2);
  EXPECT_EQ(v.parse_path, ParsePath::kTransportError);
  EXPECT_TRUE(v.is_error());
  EXPECT_NE(v.error->find("HTTP 500"), std::string::npos);
}

TEST(RemoteJudge, UnreadableBodyIsParseError) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    res.set_content("<html>gateway</html>", "text/html");
  });
  RemoteJudge judge(judge_config(ep.url()));
  Verdict v = judge.judge(testing::sample_task("settings-wifi-off"), sample_shot(), "k");
  EXPECT_EQ(v.parse_path, ParsePath::kParseError);
  EXPECT_EQ(v.raw_response, "<html>gateway</html>");
}

TEST(RemoteJudge, UnreachableAndMissingKey) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  auto cfg = judge_config("http://127.0.0.1:" + std::to_string(port) + "/v1/chat");
  cfg.timeout = std::chrono::milliseconds(500);
  Verdict v = RemoteJudge(cfg).judge(testing::sample_task("settings-wifi-off"), sample_shot(), "k");
  EXPECT_EQ(v.parse_path, ParsePath::kTransportError);

  cfg.api_key_env = "CUAEVAL_TEST_UNSET_VARIABLE";
  ::unsetenv("CUAEVAL_TEST_UNSET_VARIABLE");
  Verdict w = RemoteJudge(cfg).judge(testing::sample_task("settings-wifi-off"), sample_shot(), "k");
  EXPECT_EQ(w.parse_path, ParsePath::kTransportError);
  EXPECT_NE(w.error->find("CUAEVAL_TEST_UNSET_VARIABLE"), std::string::npos);
}

TEST(RemoteJudge, ResponseTextShapes) {
  EXPECT_EQ(RemoteJudge::response_text(completion("hi")), "hi");
  json parts = {{"choices", json::array({{{"message", {{"content", json::array({
                    {{"type", "text"}, {"text", "a"}}, {{"type", "image"}}, {{"type", "text"}, {"text", "b"}}})}}}}})}};
  EXPECT_EQ(RemoteJudge::response_text(parts), "ab");
  EXPECT_EQ(RemoteJudge::response_text(json{{"content", json::array({{{"type", "text"}, {"text", "c"}}})}}), "c");
  EXPECT_THROW(RemoteJudge::response_text(json{{"choices", json::array()}}), Error);
  EXPECT_THROW(RemoteJudge(judge_config("not a url")), Error);
}

TEST(RateLimiter, SpacesRequests) {
  RateLimiter limiter(std::chrono::milliseconds(40));
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 4; ++i) limiter.acquire();
  auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_GE(elapsed, std::chrono::milliseconds(115));
}

AgentObservation observation() {
  AgentObservation obs;
  obs.task_id = "settings-wifi-off";
  obs.task_description = "Turn Wi-Fi off.";
  obs.feedback = "Unmet goal conditions: settings.wifi == off (currently on)";
  obs.screenshot = sample_shot();
  obs.step_history = {Click{1, 2}};
  obs.steps_remaining = 4;
  return obs;
}

TEST(RemoteAgent, PostsObservationAndParsesDecision) {
  FakeEndpoint ep([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"act": {"type": "click", "x": 320, "y": 100}, "reasoning": "toggle"})",
                    "application/json");
  });
  ::setenv("CUAEVAL_TEST_AGENT_KEY", "k-123", 1);
  RemoteAgentConfig cfg{"remote-a", ep.url(), "CUAEVAL_TEST_AGENT_KEY", "X-Agent-Key",
                        std::chrono::milliseconds(2000)};
  RemoteAgent agent(cfg);
  AgentObservation obs = observation();
  EXPECT_EQ(agent.next_decision(obs), AgentDecision(Act{Click{320, 100}, "toggle"}));
  EXPECT_EQ(ep.last_custom(), "k-123");
  json body = ep.last_body();
  EXPECT_EQ(body, RemoteAgent::request_body(obs));
  EXPECT_EQ(body.at("feedback"), *obs.feedback);
  EXPECT_EQ(body.at("steps_remaining"), 4);
}

TEST(RemoteAgent, FailuresAreAgentErrors) {
  std::atomic<int> mode{0};
  FakeEndpoint ep([&](const httplib::Request&, httplib::Response& res) {
    if (mode == 0) res.status = 502;
    if (mode == 1) res.set_content("nope", "text/plain");
    if (mode == 2) res.set_content(R"({"act": {"type": "teleport"}})", "application/json");
  });
  RemoteAgent agent({"remote-a", ep.url(), std::nullopt, "Authorization", std::chrono::milliseconds(2000)});
  for (int m = 0; m < 3; ++m) {
    mode = m;
    EXPECT_THROW(agent.next_decision(observation()), AgentError) << m;
  }
}

}  // namespace
}  // namespace cuaeval
