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

#include <regex>

#include "cuaeval/error.hpp"
#include "cuaeval/feedback_loop.hpp"
#include "cuaeval/sim/environment.hpp"
#include "run_support.hpp"

namespace cuaeval {
namespace {

using testing::TempDir;

class ThrowingJudge final : public Judge {
 public:
  const std::string& evaluator_id() const override { return id_; }
  Verdict judge(const TaskSpec&, const Screenshot&, std::string_view) const override {
    throw std::runtime_error("endpoint down");
  }

 private:
  std::string id_ = "broken";
};

// Always says not done with a rationale naming the key.
class NaggingJudge final : public Judge {
 public:
  const std::string& evaluator_id() const override { return id_; }
  Verdict judge(const TaskSpec&, const Screenshot&, std::string_view key) const override {
    Verdict v;
    v.evaluator_id = id_;
    v.parse_path = ParsePath::kSynthetic;
    v.rationale = "still wrong at " + std::string(key);
    return v;
  }

 private:
  std::string id_ = "oracle";
};

TEST(FeedbackLoop, FlakyRunOutcomes) {
  TempDir dir;
  auto result = testing::run_sample("flaky_oracle", dir.path(), "r1");
  ASSERT_EQ(result.episodes.size(), 30u);
  EXPECT_EQ(result.manifest.baseline_successes(), 12);
  EXPECT_EQ(result.manifest.final_successes(), 21);
  EXPECT_EQ(result.manifest.determinism_digest, determinism_digest(result.episodes));

  TrajectoryStore store(dir.path());
  RunRecords records(store);
  EXPECT_EQ(records.load_run_manifest("r1"), result.manifest);
  for (const auto& ep : result.episodes) {
    EXPECT_EQ(records.load_episode("r1", ep.task_id), ep);
    EXPECT_FALSE(ep.error.has_value());
    EXPECT_EQ(ep.baseline_success, ep.attempts.front().verdict.done);
    // Oracle verdicts agree with ground truth.
    for (const auto& a : ep.attempts) EXPECT_EQ(a.ground_truth, a.verdict.done);
    if (ep.baseline_success) {
      EXPECT_EQ(ep.attempts.size(), 1u);
      continue;
    }
    ASSERT_EQ(ep.attempts.size(), 2u) << ep.task_id;
    const auto& first = ep.attempts[0];
    const auto& second = ep.attempts[1];
    EXPECT_FALSE(first.feedback.has_value());
    EXPECT_EQ(second.feedback, first.verdict.rationale);
    EXPECT_EQ(second.opening_state_hash, first.closing_state_hash);
    Trajectory t0 = store.load_trajectory("r1", ep.task_id, 0);
    Trajectory t1 = store.load_trajectory("r1", ep.task_id, 1);
    EXPECT_TRUE(t0.initial_screenshot.has_value());
    EXPECT_FALSE(t1.initial_screenshot.has_value());
    EXPECT_EQ(t0.final_screenshot.sidecar_hash, first.closing_state_hash);
    auto stored = records.load_verdict(second.trajectory_id, "oracle");
    ASSERT_TRUE(stored);
    EXPECT_EQ(stored->done, second.verdict.done);
  }
}

TEST(FeedbackLoop, ParallelismDoesNotChangeOutcomes) {
  TempDir dir;
  auto a = testing::run_sample("flaky_oracle", dir.path(), "p1", 1);
  auto b = testing::run_sample("flaky_oracle", dir.path(), "p4", 4);
  auto c = testing::run_sample("scripted_oracle", dir.path(), "s4", 4);
  EXPECT_EQ(a.manifest.determinism_digest, b.manifest.determinism_digest);
  EXPECT_NE(a.manifest.determinism_digest, c.manifest.determinism_digest);
  for (std::size_t i = 0; i < a.episodes.size(); ++i) {
    EXPECT_EQ(canonical_outcome(a.episodes[i]), canonical_outcome(b.episodes[i]));
  }
}

TEST(FeedbackLoop, RetriesRunToTheBudgetAndContinueState) {
  TempDir dir;
  TrajectoryStore store(dir.path());
  store.create_run("r");
  auto agent = make_agent({{"kind", "flaky"}, {"script", "agents/flaky.json"}},
                          testing::source_dir() / "fixtures");
  NaggingJudge judge;
  SimEnvironment env(testing::sample_apps());
  Episode ep = run_episode(testing::sample_task("settings-wifi-off"), *agent, judge, env,
                           {3, 10}, store, "r");
  ASSERT_EQ(ep.attempts.size(), 4u);
  for (std::size_t k = 1; k < ep.attempts.size(); ++k) {
    EXPECT_EQ(*ep.attempts[k].feedback, "still wrong at settings-wifi-off#" + std::to_string(k - 1));
    EXPECT_EQ(ep.attempts[k].opening_state_hash, ep.attempts[k - 1].closing_state_hash);
  }
  EXPECT_FALSE(ep.final_success);
  EXPECT_EQ(store.list_attempts("r", "settings-wifi-off"), (std::vector<int>{0, 1, 2, 3}));
}

TEST(FeedbackLoop, ZeroRetriesGivesOneAttempt) {
  TempDir dir;
  TrajectoryStore store(dir.path());
  store.create_run("r");
  auto agent = make_agent({{"kind", "flaky"}, {"script", "agents/flaky.json"}},
                          testing::source_dir() / "fixtures");
  NaggingJudge judge;
  SimEnvironment env(testing::sample_apps());
  Episode ep = run_episode(testing::sample_task("settings-wifi-off"), *agent, judge, env,
                           {0, 10}, store, "r");
  EXPECT_EQ(ep.attempts.size(), 1u);
  EXPECT_THROW(run_episode(testing::sample_task("settings-wifi-off"), *agent, judge, env,
                           {-1, 10}, store, "r"),
               Error);
}

TEST(FeedbackLoop, JudgeFailureEndsEpisodeWithoutRetry) {
  TempDir dir;
  TrajectoryStore store(dir.path());
  store.create_run("r");
  auto agent = make_agent({{"kind", "flaky"}, {"script", "agents/flaky.json"}},
                          testing::source_dir() / "fixtures");
  ThrowingJudge judge;
  SimEnvironment env(testing::sample_apps());
  Episode ep = run_episode(testing::sample_task("settings-wifi-off"), *agent, judge, env,
                           {2, 10}, store, "r");
  ASSERT_EQ(ep.attempts.size(), 1u);
  EXPECT_EQ(ep.attempts[0].verdict.parse_path, ParsePath::kTransportError);
  ASSERT_TRUE(ep.error.has_value());
  EXPECT_NE(ep.error->find("endpoint down"), std::string::npos);
  EXPECT_FALSE(ep.baseline_success);
  EXPECT_FALSE(ep.final_success);
}

TEST(FeedbackLoop, BenchmarkRejectsBadOptionsAndExistingRun) {
  TempDir dir;
  testing::run_sample("scripted_oracle", dir.path(), "dup");
  EXPECT_THROW(testing::run_sample("scripted_oracle", dir.path(), "dup"), Error);
  TrajectoryStore store(dir.path());
  auto agent = make_agent({{"kind", "scripted"}, {"script", "agents/scripted.json"}},
                          testing::source_dir() / "fixtures");
  OracleJudge judge;
  BenchmarkOptions opts;
  opts.run_id = "x";
  opts.parallelism = 0;
  EXPECT_THROW(run_benchmark({testing::sample_task("settings-wifi-off")}, *agent, judge,
                             sim_environment_factory(testing::sample_apps()), opts, store),
               Error);
  opts.parallelism = 1;
  EXPECT_THROW(run_benchmark({}, *agent, judge, sim_environment_factory(testing::sample_apps()),
                             opts, store),
               Error);
}

TEST(Rejudge, WritesOneVerdictPerTrajectoryAndIsIdempotent) {
  TempDir dir;
  auto result = testing::run_sample("flaky_oracle", dir.path(), "r");
  TrajectoryStore store(dir.path());
  std::size_t trajectories = 0;
  for (const auto& ep : result.episodes) trajectories += ep.attempts.size();

  auto noisy = make_judge({{"kind", "noisy"}, {"flip_probability", 0.3}, {"seed", 42}});
  VerdictSet first = rejudge_run("r", *noisy, testing::sample_corpus(), store);
  EXPECT_EQ(first.verdicts.size(), trajectories);
  VerdictSet again = rejudge_run("r", *noisy, testing::sample_corpus(), store);
  for (const auto& [id, v] : first.verdicts) {
    EXPECT_EQ(v.done, again.verdicts.at(id).done);
    EXPECT_EQ(v.parse_path, again.verdicts.at(id).parse_path);
  }
  RunRecords records(store);
  EXPECT_EQ(records.load_verdicts("r", first.evaluator_id).size(), trajectories);
  auto evaluators = records.list_evaluators("r");
  EXPECT_EQ(evaluators.size(), 2u);

  // Trajectories are untouched.
  for (const auto& ep : result.episodes) EXPECT_EQ(records.load_episode("r", ep.task_id), ep);

  // Same oracle reproduces stored verdicts; a disagreeing evaluator under the
  // same id is rejected.
  OracleJudge oracle;
  EXPECT_NO_THROW(rejudge_run("r", oracle, testing::sample_corpus(), store));
  NaggingJudge impostor;
  try {
    rejudge_run("r", impostor, testing::sample_corpus(), store);
    ADD_FAILURE() << "expected a conflict";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAlreadyExists);
  }
}

TEST(Rejudge, UnknownRunAndMissingTask) {
  TempDir dir;
  TrajectoryStore store(dir.path());
  OracleJudge oracle;
  try {
    rejudge_run("ghost", oracle, testing::sample_corpus(), store);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
  testing::run_sample("scripted_oracle", dir.path(), "r");
  Corpus empty;
  EXPECT_THROW(rejudge_run("r", oracle, empty, store), Error);
}

TEST(RunIds, GeneratedFormat) {
  std::string id = generate_run_id();
  EXPECT_TRUE(std::regex_match(id, std::regex(R"(run-\d{8}T\d{6}Z-[0-9a-f]{6})"))) << id;
  EXPECT_TRUE(is_safe_id(id));
}

}  // namespace
}  // namespace cuaeval
