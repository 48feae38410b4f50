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

#include "cuaeval/feedback_loop.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <random>
#include <thread>

#include "cuaeval/error.hpp"
#include "cuaeval/sim/predicate.hpp"
#include "cuaeval/sim/state.hpp"
#include "cuaeval/util.hpp"

namespace cuaeval {

void validate(const EpisodeConfig& config) {
  if (config.max_retries < 0) throw Error(ErrorCode::kInvalidArgument, "max_retries must be >= 0");
  if (config.step_budget < 1) throw Error(ErrorCode::kInvalidArgument, "step_budget must be >= 1");
}

namespace {

std::optional<bool> ground_truth_of(const TaskSpec& task, const Screenshot& shot) {
  if (!task.goal_predicate || !shot.state_sidecar) return std::nullopt;
  auto state = sim::from_sidecar(*shot.state_sidecar);
  return sim::check_goal(state, sim::GoalPredicate::parse(*task.goal_predicate));
}

std::optional<std::string> state_hash(const Screenshot& shot) {
  if (!shot.state_sidecar) return std::nullopt;
  return sha256_hex(*shot.state_sidecar);
}

Verdict judge_safely(const Judge& judge, const TaskSpec& task, const Screenshot& shot,
                     const std::string& key) {
  try {
    return judge.judge(task, shot, key);
  } catch (const std::exception& e) {
    Verdict v;
    v.evaluator_id = judge.evaluator_id();
    v.parse_path = ParsePath::kTransportError;
    v.prompt_template_version = kPromptTemplateVersion;
    v.error = std::string("evaluator failed: ") + e.what();
    return v;
  }
}

}  // namespace

Episode run_episode(const TaskSpec& task, const Agent& agent, const Judge& judge,
                    Environment& env, const EpisodeConfig& config, TrajectoryStore& store,
                    const std::string& run_id) {
  validate(config);
  RunRecords records(store);
  Episode ep;
  ep.episode_id = make_episode_id(run_id, task.task_id);
  ep.run_id = run_id;
  ep.task_id = task.task_id;
  ep.agent_id = agent.id();
  ep.evaluator_id = judge.evaluator_id();

  env.reset(task);
  std::optional<std::string> feedback;
  for (int k = 0; k <= config.max_retries; ++k) {
    auto handle = store.begin_trajectory(run_id, task.task_id, agent.id(), k);
    AttemptResult res =
        run_attempt(agent, env, task, feedback, config.step_budget, std::move(handle), k);

    AttemptRecord rec;
    rec.attempt_index = k;
    rec.trajectory_id = res.trajectory.trajectory_id;
    rec.status = res.trajectory.status;
    rec.step_count = static_cast<int>(res.trajectory.steps.size());
    rec.feedback = feedback;
    rec.ground_truth = ground_truth_of(task, res.closing);
    rec.opening_state_hash = state_hash(res.opening);
    rec.closing_state_hash = state_hash(res.closing);
    rec.verdict = judge_safely(judge, task, res.closing, judge_sample_key(task.task_id, k));
    records.write_verdict(rec.trajectory_id, rec.verdict);
    ep.attempts.push_back(rec);

    if (rec.verdict.is_error()) {
      ep.error = "judge " + std::string(to_string(rec.verdict.parse_path)) + " on attempt " +
                 std::to_string(k) + ": " + rec.verdict.error.value_or("");
      break;
    }
    if (rec.verdict.done) break;
    feedback = rec.verdict.rationale;
  }

  const auto& first = ep.attempts.front().verdict;
  const auto& last = ep.attempts.back().verdict;
  ep.baseline_success = !first.is_error() && first.done;
  ep.final_success = !last.is_error() && last.done;
  ep.ground_truth = ep.attempts.back().ground_truth;
  records.write_episode(ep);
  return ep;
}

BenchmarkResult run_benchmark(const std::vector<TaskSpec>& tasks, const Agent& agent,
                              const Judge& judge, const EnvironmentFactory& make_env,
                              const BenchmarkOptions& options, TrajectoryStore& store) {
  if (tasks.empty()) throw Error(ErrorCode::kInvalidArgument, "task list is empty");
  if (options.parallelism < 1) throw Error(ErrorCode::kInvalidArgument, "parallelism must be >= 1");
  validate(options.episode);
  store.create_run(options.run_id);

  RunManifest initial;
  initial.run_id = options.run_id;
  initial.config = options.config_snapshot;
  initial.corpus_hash = options.corpus_hash;
  initial.agent_id = agent.id();
  initial.evaluator_id = judge.evaluator_id();
  initial.created_at = now_iso8601();
  ManifestWriter writer(store, initial);

  std::vector<Episode> episodes(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (failure) return;
      }
      try {
        auto env = make_env();
        episodes[i] = run_episode(tasks[i], agent, judge, *env, options.episode, store,
                                  options.run_id);
        writer.record(episodes[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  int n = std::min<int>(options.parallelism, static_cast<int>(tasks.size()));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::sort(episodes.begin(), episodes.end(),
            [](const Episode& a, const Episode& b) { return a.task_id < b.task_id; });
  BenchmarkResult result;
  result.manifest = writer.finish(episodes);
  result.episodes = std::move(episodes);
  return result;
}

VerdictSet rejudge_run(const std::string& run_id, const Judge& judge, const Corpus& corpus,
                       const TrajectoryStore& store) {
  if (!store.has_run(run_id)) throw Error(ErrorCode::kNotFound, "run '" + run_id + "' not found");
  RunRecords records(store);
  VerdictSet out;
  out.run_id = run_id;
  out.evaluator_id = judge.evaluator_id();
  for (const auto& task_id : store.list_episode_tasks(run_id)) {
    const TaskSpec* task = corpus.find_task(task_id);
    if (task == nullptr) {
      throw Error(ErrorCode::kNotFound,
                  "task '" + task_id + "' of run '" + run_id + "' is not in the corpus");
    }
    for (int k : store.list_attempts(run_id, task_id)) {
      Trajectory t = store.load_trajectory(run_id, task_id, k);
      Screenshot shot = store.read_screenshot(run_id, task_id, k, t.final_screenshot);
      Verdict v = judge_safely(judge, *task, shot, judge_sample_key(task_id, k));
      records.write_verdict(t.trajectory_id, v);
      out.verdicts.emplace(t.trajectory_id, std::move(v));
    }
  }
  if (out.verdicts.empty()) {
    throw Error(ErrorCode::kFailedPrecondition, "run '" + run_id + "' has no trajectories");
  }
  return out;
}

std::string generate_run_id() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  std::random_device rd;
  char suffix[8];
  std::snprintf(suffix, sizeof suffix, "%06x", rd() & 0xffffffu);
  return std::string("run-") + stamp + "-" + suffix;
}

}  // namespace cuaeval
