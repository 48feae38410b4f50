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

#include "cuaeval/error.hpp"
#include "cuaeval/run_config.hpp"
#include "cuaeval/util.hpp"
#include "test_support.hpp"

namespace cuaeval {
namespace {

using nlohmann::json;
using testing::TempDir;

json base_config() {
  return {{"corpus", "corpus"},
          {"sim_apps", "apps"},
          {"agent", {{"kind", "scripted"}, {"script", "agent.json"}}},
          {"judge", {{"kind", "oracle"}}}};
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

TEST(RunConfig, DefaultsAndPathResolution) {
  RunConfig c = run_config_from_json(base_config(), "/base/dir");
  EXPECT_EQ(c.corpus_dir, "/base/dir/corpus");
  EXPECT_EQ(c.store_root, "/base/dir/store");
  EXPECT_EQ(c.episode.max_retries, 1);
  EXPECT_EQ(c.episode.step_budget, 25);
  EXPECT_EQ(c.parallelism, 1);
  EXPECT_EQ(c.seed, 0u);
  EXPECT_FALSE(c.run_id);
  json j = base_config();
  j["corpus"] = "/abs/corpus";
  j["sim_apps"] = "../apps";
  EXPECT_EQ(run_config_from_json(j, "/base/dir").corpus_dir, "/abs/corpus");
  EXPECT_EQ(run_config_from_json(j, "/base/dir").sim_apps_dir, "/base/apps");

  RunConfig loaded = load_run_config(testing::fixture("configs/flaky_oracle.json"));
  EXPECT_EQ(loaded.corpus_dir, (testing::source_dir() / "data/sample_corpus").lexically_normal());
  EXPECT_EQ(loaded.seed, 7u);
  EXPECT_EQ(loaded.episode.step_budget, 10);
  json snap = loaded.snapshot();
  EXPECT_EQ(snap.at("agent").at("kind"), "flaky");
  EXPECT_EQ(snap.at("max_retries"), 1);
}

TEST(RunConfig, RejectsBadFields) {
  auto with = [](const std::string& key, json value) {
    json j = base_config();
    j[key] = std::move(value);
    return j;
  };
  EXPECT_EQ(code_of([&] { run_config_from_json(with("colour", 1), "/"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { run_config_from_json(with("max_retries", -1), "/"); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { run_config_from_json(with("step_budget", 0), "/"); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { run_config_from_json(with("parallelism", 0), "/"); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { run_config_from_json(with("seed", "seven"), "/"); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { run_config_from_json(with("limit", 0), "/"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { run_config_from_json(with("run_id", "../x"), "/"); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { run_config_from_json(json::array(), "/"); }), ErrorCode::kParse);
  json missing = base_config();
  missing.erase("judge");
  EXPECT_EQ(code_of([&] { run_config_from_json(missing, "/"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { load_run_config("/no/such/config.json"); }), ErrorCode::kNotFound);
  TempDir dir;
  write_file_atomic(dir / "bad.json", "{not json");
  EXPECT_EQ(code_of([&] { load_run_config(dir / "bad.json"); }), ErrorCode::kParse);
}

TEST(RunConfig, SecretsAreRejectedAnywhere) {
  json j = base_config();
  j["judge"] = {{"kind", "remote"}, {"api_key", "sk-123"}};
  EXPECT_EQ(code_of([&] { run_config_from_json(j, "/"); }), ErrorCode::kInvalidArgument);
  j = base_config();
  j["agent"]["headers"] = json::array({{{"Authorization", "Bearer x"}}});
  EXPECT_EQ(code_of([&] { run_config_from_json(j, "/"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { make_judge({{"kind", "oracle"}, {"token", "t"}}); }),
            ErrorCode::kInvalidArgument);
}

TEST(Components, JudgeSpecs) {
  EXPECT_EQ(make_judge({{"kind", "oracle"}})->evaluator_id(), "oracle");
  EXPECT_EQ(make_judge({{"kind", "oracle"}, {"evaluator_id", "truth"}})->evaluator_id(), "truth");
  auto noisy = make_judge({{"kind", "noisy"}, {"flip_probability", 0.3}, {"seed", 42}});
  EXPECT_FALSE(noisy->evaluator_id().empty());
  EXPECT_NE(noisy->evaluator_id(), "oracle");
  EXPECT_EQ(code_of([] { make_judge({{"kind", "noisy"}}); }), ErrorCode::kInvalidArgument);
  EXPECT_THROW(make_judge({{"kind", "noisy"}, {"flip_probability", 1.5}}), Error);
  EXPECT_EQ(code_of([] { make_judge({{"kind", "crystal"}}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { make_judge({{"kind", "oracle"}, {"evaluator_id", "a/b"}}); }),
            ErrorCode::kInvalidArgument);
  auto remote = make_judge({{"kind", "remote"},
                            {"evaluator_id", "vlm"},
                            {"endpoint_url", "http://127.0.0.1:9/v1/chat"},
                            {"model", "m"},
                            {"api_key_env", "SOME_KEY"}});
  EXPECT_EQ(remote->evaluator_id(), "vlm");
  EXPECT_EQ(code_of([] {
              make_judge({{"kind", "remote"}, {"evaluator_id", "vlm"},
                          {"endpoint_url", "http://h/x"}, {"model", "m"}, {"temperature", 0.7}});
            }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { make_judge({{"kind", "remote"}, {"evaluator_id", "vlm"}}); }),
            ErrorCode::kInvalidArgument);
}

TEST(Components, AgentSpecs) {
  auto base = testing::source_dir() / "fixtures";
  auto flaky = make_agent({{"kind", "flaky"}, {"script", "agents/flaky.json"}}, base);
  EXPECT_EQ(flaky->id(), "flaky-agent");
  auto renamed = make_agent({{"kind", "scripted"}, {"script", "agents/flaky.json"}, {"agent_id", "other"}}, base);
  EXPECT_EQ(renamed->id(), "other");
  EXPECT_EQ(code_of([&] { make_agent({{"kind", "flaky"}, {"script", "agents/none.json"}}, base); }),
            ErrorCode::kNotFound);
  EXPECT_EQ(code_of([&] { make_agent({{"kind", "human"}}, base); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { make_agent({{"kind", "remote"}, {"agent_id", "Bad Id"}, {"endpoint_url", "http://h/x"}}, base); }),
            ErrorCode::kInvalidArgument);
  auto remote = make_agent({{"kind", "remote"}, {"agent_id", "far"}, {"endpoint_url", "http://h/x"}}, base);
  EXPECT_EQ(remote->id(), "far");
}

TEST(PrepareRun, ResolvesEverythingBeforeExecution) {
  RunConfig c = load_run_config(testing::fixture("configs/flaky_oracle.json"));
  PreparedRun run = prepare_run(c);
  EXPECT_EQ(run.tasks.size(), 30u);
  EXPECT_EQ(run.agent->id(), "flaky-agent");
  EXPECT_EQ(run.judge->evaluator_id(), "oracle");

  RunConfig limited = c;
  limited.limit = 5;
  limited.filter.app_ids = {"settings"};
  auto picked = prepare_run(limited).tasks;
  EXPECT_EQ(picked.size(), 5u);
  for (const auto& t : picked) EXPECT_EQ(t.app_id, "settings");
  EXPECT_EQ(prepare_run(limited).tasks, picked);

  RunConfig missing = c;
  missing.corpus_dir = "/no/such/corpus";
  EXPECT_EQ(code_of([&] { prepare_run(missing); }), ErrorCode::kNotFound);

  // A predicate naming a field no simulated app has is caught up front.
  TempDir dir;
  Corpus corpus = testing::sample_corpus();
  corpus.tasks[0].goal_predicate = "settings.warp_drive == on";
  write_corpus(corpus, dir / "corpus");
  RunConfig broken = c;
  broken.corpus_dir = dir / "corpus";
  EXPECT_EQ(code_of([&] { prepare_run(broken); }), ErrorCode::kFailedPrecondition);

  // Oracle judging needs predicates.
  corpus = testing::sample_corpus();
  corpus.tasks[0].goal_predicate.reset();
  write_corpus(corpus, dir / "corpus2");
  RunConfig no_pred = c;
  no_pred.corpus_dir = dir / "corpus2";
  EXPECT_EQ(code_of([&] { prepare_run(no_pred); }), ErrorCode::kFailedPrecondition);
}

}  // namespace
}  // namespace cuaeval
