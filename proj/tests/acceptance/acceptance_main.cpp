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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cuaeval/agent.hpp"
#include "cuaeval/cli.hpp"
#include "cuaeval/error.hpp"
#include "cuaeval/feedback_loop.hpp"
#include "cuaeval/judge.hpp"
#include "cuaeval/metrics.hpp"
#include "cuaeval/report.hpp"
#include "cuaeval/run_config.hpp"
#include "cuaeval/sim/environment.hpp"
#include "cuaeval/util.hpp"
#include "run_support.hpp"
#include "synthetic_runs.hpp"

namespace cuaeval {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failures; the first few are reported.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) messages_ += (messages_.empty() ? "" : "; ") + what;
  }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    if (failures_ <= 3) return messages_;
    return messages_ + " (+" + std::to_string(failures_ - 3) + " more)";
  }

 private:
  int failures_ = 0;
  std::string messages_;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2fs", s);
  return buf;
}

// 1. Oracle verdicts against goal-predicate ground truth.
Outcome oracle_fidelity() {
  auto start = Clock::now();
  testing::TempDir dir;
  auto scripted = testing::run_sample("scripted_oracle", dir.path(), "scripted");
  auto flaky = testing::run_sample("flaky_oracle", dir.path(), "flaky");
  TrajectoryStore store(dir.path());
  MetricsReport r = build_report({RunData::load(store, "scripted"), RunData::load(store, "flaky")}, {});
  double elapsed = seconds_since(start);

  Check c;
  std::int64_t trajectories = 0;
  for (const auto& agent : {"scripted-agent", "flaky-agent"}) {
    const AccuracyCell* cell = r.find_accuracy(agent, "oracle");
    c.expect(cell != nullptr, std::string("no oracle cell for ") + agent);
    if (!cell) continue;
    c.expect(cell->accuracy && *cell->accuracy == Ratio(1, 1),
             std::string(agent) + " accuracy " + (cell->accuracy ? cell->accuracy->str() : "undefined"));
    c.expect(cell->matrix.fp == 0 && cell->matrix.fn == 0, std::string(agent) + " has fp/fn");
    c.expect(cell->matrix.excluded == 0, std::string(agent) + " has excluded verdicts");
    trajectories += cell->matrix.total();
  }
  c.expect(scripted.episodes.size() == 30 && flaky.episodes.size() == 30, "expected 30 episodes per run");
  c.expect(elapsed < 10.0, "runtime " + fmt_seconds(elapsed));
  return {c.ok(), c.ok() ? "accuracy 1.00 with fp = fn = 0 over " + std::to_string(trajectories) +
                               " trajectories (" + fmt_seconds(elapsed) + ")"
                         : c.summary()};
}

// 2. Flaky agent success rates and run reproducibility.
Outcome feedback_lift() {
  auto start = Clock::now();
  testing::TempDir dir;
  auto a = testing::run_sample("flaky_oracle", dir.path(), "p1-a", 1);
  auto b = testing::run_sample("flaky_oracle", dir.path(), "p1-b", 1);
  auto c4 = testing::run_sample("flaky_oracle", dir.path(), "p4", 4);
  double elapsed = seconds_since(start);

  Check c;
  SuccessRates s = success_rates(a.episodes, TruthSource::kJudgeVerdict);
  SuccessRates truth = success_rates(a.episodes, TruthSource::kOracle);
  c.expect(s.n_tasks == 30, "episodes " + std::to_string(s.n_tasks));
  c.expect(s.before == Ratio(2, 5), "before " + s.before.str());
  c.expect(s.after == Ratio(7, 10), "after " + s.after.str());
  c.expect(s.relative_improvement && *s.relative_improvement == Ratio(3, 4), "relative improvement");
  c.expect(truth == s, "oracle ground truth disagrees with judged rates");
  c.expect(a.manifest.determinism_digest == b.manifest.determinism_digest, "rerun digest differs");
  c.expect(a.manifest.determinism_digest == c4.manifest.determinism_digest,
           "parallelism 4 digest differs");
  for (std::size_t i = 0; i < a.episodes.size() && i < c4.episodes.size(); ++i) {
    c.expect(canonical_outcome(a.episodes[i]) == canonical_outcome(c4.episodes[i]),
             "episode " + a.episodes[i].task_id + " differs under parallelism");
  }
  c.expect(elapsed < 30.0, "runtime " + fmt_seconds(elapsed));
  return {c.ok(), c.ok() ? "before " + s.before.fixed(2) + ", after " + s.after.fixed(2) +
                               ", relative improvement " + s.relative_improvement->fixed(2) +
                               ", digest " + a.manifest.determinism_digest.substr(0, 12) +
                               " identical over 3 runs (" + fmt_seconds(elapsed) + ")"
                         : c.summary()};
}

// Returns the truth recorded for the task, standing in for an oracle.
class TableJudge final : public Judge {
 public:
  explicit TableJudge(const std::map<std::string, bool>* truth) : truth_(truth) {}
  const std::string& evaluator_id() const override { return id_; }
  Verdict judge(const TaskSpec& task, const Screenshot&, std::string_view) const override {
    return testing::make_verdict(id_, truth_->at(task.task_id));
  }

 private:
  const std::map<std::string, bool>* truth_;
  std::string id_ = "oracle";
};

// 3. Noisy judge accuracy against the flip probability.
Outcome noisy_calibration() {
  auto start = Clock::now();
  constexpr int kN = 10000;
  std::mt19937_64 rng(2026);
  std::map<std::string, bool> truth;
  for (int i = 0; i < kN; ++i) truth["synthetic-" + std::to_string(i)] = rng() % 2;
  auto inner = std::make_shared<TableJudge>(&truth);
  NoisyJudge noisy(inner, 0.3, 42);

  std::map<std::string, Verdict> verdicts;
  std::map<std::string, bool> by_trajectory;
  Screenshot blank;
  for (const auto& [task_id, t] : truth) {
    TaskSpec task;
    task.task_id = task_id;
    std::string traj = make_trajectory_id("synthetic", task_id, 0);
    verdicts[traj] = noisy.judge(task, blank, judge_sample_key(task_id, 0));
    by_trajectory[traj] = t;
  }
  AccuracyResult r = judge_accuracy(verdicts, by_trajectory);
  double elapsed = seconds_since(start);
  Check c;
  c.expect(r.n_used == kN, "used " + std::to_string(r.n_used));
  c.expect(r.accuracy.has_value(), "accuracy undefined");
  double acc = r.accuracy ? r.accuracy->value() : 0.0;
  c.expect(acc >= 0.68 && acc <= 0.72, "accuracy " + std::to_string(acc));
  c.expect(elapsed < 60.0, "runtime " + fmt_seconds(elapsed));
  char buf[96];
  std::snprintf(buf, sizeof buf, "accuracy %.4f over %d verdicts (%s)", acc, kN,
                fmt_seconds(elapsed).c_str());
  return {c.ok(), c.ok() ? buf : c.summary() + " | " + buf};
}

// Fraction comparison by cross multiplication.
bool same(const Ratio& r, std::int64_t num, std::int64_t den) {
  return r.num() * den == num * r.den();
}

struct RandomRun {
  RunData data;
  std::vector<HumanLabel> labels;
};

RandomRun random_run(std::mt19937_64& rng, const std::string& run_id, const std::string& agent,
                     const std::vector<std::string>& evaluators) {
  auto coin = [&](int one_in) { return rng() % one_in == 0; };
  auto path = [&] {
    switch (rng() % 8) {
      case 0: return ParsePath::kParseError;
      case 1: return ParsePath::kTransportError;
      case 2: return ParsePath::kKeywordFallback;
      default: return ParsePath::kStrictJson;
    }
  };
  RandomRun out;
  RunData& d = out.data;
  d.manifest.run_id = run_id;
  d.manifest.agent_id = agent;
  d.manifest.evaluator_id = "primary";
  int n = 1 + static_cast<int>(rng() % 25);
  for (int i = 0; i < n; ++i) {
    Episode e;
    e.run_id = run_id;
    e.task_id = "task" + std::to_string(i);
    e.episode_id = make_episode_id(run_id, e.task_id);
    e.agent_id = agent;
    e.evaluator_id = "primary";
    int attempts = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < attempts; ++k) {
      AttemptRecord a;
      a.attempt_index = k;
      a.trajectory_id = make_trajectory_id(run_id, e.task_id, k);
      a.ground_truth = coin(2);
      a.verdict = testing::make_verdict("primary", coin(2), path());
      d.verdicts["primary"][a.trajectory_id] = a.verdict;
      for (const auto& ev : evaluators) {
        if (coin(6)) continue;  // some trajectories were never judged by this one
        d.verdicts[ev][a.trajectory_id] = testing::make_verdict(ev, coin(2), path());
      }
      int annotators = static_cast<int>(rng() % 4);
      for (int h = 0; h < annotators; ++h) {
        int revisions = 1 + static_cast<int>(rng() % 2);
        for (int v = 0; v < revisions; ++v) {
          out.labels.push_back({e.task_id, a.trajectory_id, coin(2) ? Label::kDone : Label::kNotDone,
                                "ann" + std::to_string(h), ""});
        }
      }
      e.attempts.push_back(a);
    }
    const auto& first = e.attempts.front().verdict;
    const auto& last = e.attempts.back().verdict;
    e.baseline_success = !first.is_error() && first.done;
    e.final_success = !last.is_error() && last.done;
    e.ground_truth = e.attempts.back().ground_truth;
    d.episodes.push_back(std::move(e));
  }
  return out;
}

// Majority of each annotator's last label, ties dropped.
std::map<std::string, bool> brute_adjudicate(const std::vector<HumanLabel>& labels) {
  std::map<std::pair<std::string, std::string>, bool> last;
  for (const auto& l : labels) last[{l.trajectory_id, l.annotator_id}] = l.label == Label::kDone;
  std::map<std::string, int> balance;
  for (const auto& [key, done] : last) balance[key.first] += done ? 1 : -1;
  std::map<std::string, bool> out;
  for (const auto& [id, b] : balance) {
    if (b != 0) out[id] = b > 0;
  }
  return out;
}

// 4. Report numbers against a direct recount.
Outcome metrics_equivalence() {
  auto start = Clock::now();
  std::mt19937_64 rng(4242);
  constexpr int kSets = 2000;
  Check c;
  int checked_cells = 0, rejected = 0;
  for (int set = 0; set < kSets; ++set) {
    std::vector<std::string> evaluators;
    int n_eval = static_cast<int>(rng() % 3);
    for (int i = 0; i < n_eval; ++i) evaluators.push_back("judge-" + std::to_string(i));
    int n_agents = 1 + static_cast<int>(rng() % 3);
    std::vector<RunData> runs;
    std::vector<HumanLabel> labels;
    for (int a = 0; a < n_agents; ++a) {
      RandomRun rr = random_run(rng, "run" + std::to_string(a), "agent" + std::to_string(a), evaluators);
      runs.push_back(rr.data);
      labels.insert(labels.end(), rr.labels.begin(), rr.labels.end());
    }
    std::shuffle(labels.begin(), labels.end(), rng);  // file order still decides revisions
    ReportOptions opts;
    opts.truth = static_cast<TruthSource>(rng() % 3);
    opts.human = adjudicate_labels(labels);
    std::map<std::string, bool> human = brute_adjudicate(labels);
    c.expect(opts.human == human, "adjudication differs in set " + std::to_string(set));

    // Expected truth per trajectory; a missing entry where success needs one
    // means the report must refuse.
    bool refuse = false;
    std::map<std::string, std::map<std::string, bool>> truth_by_run;
    for (const auto& run : runs) {
      auto& truth = truth_by_run[run.manifest.run_id];
      for (const auto& e : run.episodes) {
        for (const auto& a : e.attempts) {
          if (opts.truth == TruthSource::kOracle) truth[a.trajectory_id] = *a.ground_truth;
          if (opts.truth == TruthSource::kJudgeVerdict && !a.verdict.is_error()) {
            truth[a.trajectory_id] = a.verdict.done;
          }
          if (opts.truth == TruthSource::kHuman && human.count(a.trajectory_id)) {
            truth[a.trajectory_id] = human.at(a.trajectory_id);
          }
        }
        if (opts.truth == TruthSource::kHuman) {
          refuse = refuse || !human.count(e.attempts.front().trajectory_id) ||
                   !human.count(e.attempts.back().trajectory_id);
        }
      }
      // Accuracy needs at least one joined trajectory per evaluator.
      for (const auto& [ev, verdicts] : run.verdicts) {
        bool joined = false;
        for (const auto& [id, v] : verdicts) joined = joined || truth.count(id);
        refuse = refuse || !joined;
      }
    }

    MetricsReport report;
    try {
      report = build_report(runs, opts);
    } catch (const Error& e) {
      c.expect(refuse && e.code() == ErrorCode::kFailedPrecondition,
               "unexpected refusal in set " + std::to_string(set) + ": " + e.what());
      ++rejected;
      continue;
    }
    c.expect(!refuse, "report built without the needed truth in set " + std::to_string(set));

    for (const auto& run : runs) {
      const std::string& agent = run.manifest.agent_id;
      const auto& truth = truth_by_run.at(run.manifest.run_id);
      for (const auto& [ev, verdicts] : run.verdicts) {
        std::int64_t agree = 0, used = 0, excluded = 0;
        for (const auto& [id, v] : verdicts) {
          auto t = truth.find(id);
          if (t == truth.end()) continue;
          if (v.parse_path == ParsePath::kParseError || v.parse_path == ParsePath::kTransportError) {
            ++excluded;
            continue;
          }
          ++used;
          agree += v.done == t->second;
        }
        const AccuracyCell* cell = report.find_accuracy(agent, ev);
        c.expect(cell != nullptr, "missing accuracy cell");
        if (!cell) continue;
        ++checked_cells;
        c.expect(cell->matrix.excluded == excluded && cell->matrix.n_used() == used,
                 "counts differ for " + agent + "/" + ev);
        if (used == 0) {
          c.expect(!cell->accuracy, "accuracy should be undefined");
        } else {
          c.expect(cell->accuracy && same(*cell->accuracy, agree, used),
                   "accuracy differs for " + agent + "/" + ev);
        }

        std::int64_t before = 0, after = 0;
        auto good = [&](const std::string& id) {
          auto it = verdicts.find(id);
          return it != verdicts.end() && !it->second.is_error() && it->second.done;
        };
        for (const auto& e : run.episodes) {
          before += good(e.attempts.front().trajectory_id);
          after += good(e.attempts.back().trajectory_id);
        }
        const SuccessCell* s = report.find_success(agent, ev);
        std::int64_t n = static_cast<std::int64_t>(run.episodes.size());
        c.expect(s && same(s->rates.before, before, n) && same(s->rates.after, after, n),
                 "success differs for " + agent + "/" + ev);
        if (s && before == 0) c.expect(!s->rates.relative_improvement, "improvement should be undefined");
        if (s && before > 0) {
          c.expect(s->rates.relative_improvement &&
                       same(*s->rates.relative_improvement, after - before, before),
                   "improvement differs for " + agent + "/" + ev);
        }
      }

      // Baseline row from the truth source.
      std::int64_t before = 0, after = 0;
      for (const auto& e : run.episodes) {
        const auto& first = e.attempts.front();
        const auto& last = e.attempts.back();
        switch (opts.truth) {
          case TruthSource::kOracle:
            before += *first.ground_truth;
            after += *last.ground_truth;
            break;
          case TruthSource::kJudgeVerdict:
            before += e.baseline_success;
            after += e.final_success;
            break;
          case TruthSource::kHuman:
            before += human.at(first.trajectory_id);
            after += human.at(last.trajectory_id);
            break;
        }
      }
      const SuccessCell* s = report.find_success(agent, kBaselineRow);
      std::int64_t n = static_cast<std::int64_t>(run.episodes.size());
      c.expect(s && same(s->rates.before, before, n) && same(s->rates.after, after, n),
               "baseline differs for " + agent);
    }
  }
  int compared = kSets - rejected;
  c.expect(compared >= 1000, "only " + std::to_string(compared) + " sets produced a report");
  double elapsed = seconds_since(start);
  return {c.ok(), c.ok() ? std::to_string(compared) + " random sets recounted (" +
                               std::to_string(checked_cells) + " cells exact), " +
                               std::to_string(rejected) + " more correctly refused (" +
                               fmt_seconds(elapsed) + ")"
                         : c.summary()};
}

// 5. Rendered table cell and CSV shape.
Outcome table_reproduction() {
  Check c;
  // One agent, 100 trajectories, 73 agreements.
  std::vector<std::vector<bool>> truths;
  for (int i = 0; i < 100; ++i) truths.push_back({i % 3 == 0});
  RunData run = testing::synthetic_run("r", "agent-a", truths);
  int i = 0;
  for (const auto& e : run.episodes) {
    bool t = *e.attempts[0].ground_truth;
    run.verdicts["vlm"][e.attempts[0].trajectory_id] =
        testing::make_verdict("vlm", i++ < 73 ? t : !t, ParsePath::kStrictJson);
  }
  testing::TempDir dir;
  auto files = emit_report(build_report({run}, {}), dir / "out");
  std::string table = read_file(dir / "out" / "accuracy_table.md");
  c.expect(table.find("| vlm | 0.73 |") != std::string::npos, "no 0.73 cell in table");

  // Three agents, two judges besides the oracle.
  std::vector<RunData> runs;
  for (int a = 0; a < 3; ++a) {
    RunData r = testing::synthetic_run("r" + std::to_string(a), "agent-" + std::to_string(a), truths);
    for (const char* ev : {"vlm-1", "vlm-2"}) {
      for (const auto& e : r.episodes) {
        r.verdicts[ev][e.attempts[0].trajectory_id] = testing::make_verdict(ev, true, ParsePath::kStrictJson);
      }
    }
    runs.push_back(std::move(r));
  }
  MetricsReport multi = build_report(runs, {});
  emit_report(multi, dir / "multi");
  std::string csv = read_file(dir / "multi" / "success_rates.csv");
  std::size_t rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) - 1;
  std::size_t expected = multi.agents.size() * (multi.evaluators.size() + 1);
  c.expect(rows == expected, "csv rows " + std::to_string(rows) + " != " + std::to_string(expected));
  c.expect(multi.agents.size() == 3 && multi.evaluators.size() == 3, "unexpected report shape");
  return {c.ok(), c.ok() ? "cell 0.73 rendered; csv " + std::to_string(rows) + " rows = 3 agents x (3 evaluators + baseline)"
                         : c.summary()};
}

// Wraps an agent and records what it saw at the start of each attempt.
class RecordingAgent final : public Agent {
 public:
  struct Opening {
    int attempt_index;
    std::optional<std::string> feedback;
    std::string sidecar_hash;
  };

  explicit RecordingAgent(std::shared_ptr<const Agent> inner) : inner_(std::move(inner)) {}
  const std::string& id() const override { return inner_->id(); }
  AgentDecision next_decision(const AgentObservation& obs) const override {
    if (obs.step_history.empty()) {
      openings.push_back({obs.attempt_index, obs.feedback,
                          obs.screenshot.state_sidecar ? sha256_hex(*obs.screenshot.state_sidecar) : ""});
    }
    return inner_->next_decision(obs);
  }

  mutable std::vector<Opening> openings;

 private:
  std::shared_ptr<const Agent> inner_;
};

std::vector<AgentDecision> random_script(std::mt19937_64& rng, const sim::AppRegistry& apps) {
  std::vector<std::pair<int, int>> targets;
  for (const auto& [id, def] : apps.apps) {
    for (const auto& r : def.regions) targets.push_back({r.x + r.w / 2, r.y + r.h / 2});
  }
  for (const auto& slot : apps.dock_slots()) targets.push_back({slot.x + slot.w / 2, slot.y + slot.h / 2});
  static const char* kWords[] = {"hello", "Work", "meeting", "x"};
  std::vector<AgentDecision> script;
  int n = 1 + static_cast<int>(rng() % 5);
  for (int i = 0; i < n; ++i) {
    ActionRecord action;
    switch (rng() % 6) {
      case 0: action = TypeText{kWords[rng() % 4]}; break;
      case 1: action = KeyPress{{"cmd", "z"}}; break;
      case 2: {
        auto [x, y] = targets[rng() % targets.size()];
        action = DoubleClick{x, y};
        break;
      }
      default: {
        auto [x, y] = targets[rng() % targets.size()];
        action = Click{x, y};
      }
    }
    script.push_back(Act{action, "step " + std::to_string(i)});
  }
  script.push_back(DeclareDone{"looks finished"});
  return script;
}

// 6. State and feedback carried from one attempt into the next.
Outcome retry_continuity() {
  auto start = Clock::now();
  constexpr int kEpisodes = 500;
  std::mt19937_64 rng(6);
  auto apps = testing::sample_apps();
  const auto& tasks = testing::sample_corpus().tasks;
  testing::TempDir dir;
  TrajectoryStore store(dir.path());
  RunRecords records(store);
  OracleJudge oracle;
  Check c;
  int pairs = 0, retried = 0, run_index = 0;
  std::set<std::string> used_in_run;
  std::string run_id;

  for (int ep = 0; ep < kEpisodes; ++ep) {
    const TaskSpec& task = tasks[rng() % tasks.size()];
    if (run_id.empty() || used_in_run.count(task.task_id)) {
      run_id = "continuity-" + std::to_string(run_index++);
      store.create_run(run_id);
      used_in_run.clear();
    }
    used_in_run.insert(task.task_id);

    ScriptedAgentDef def;
    def.agent_id = "random-flaky";
    ScriptedTask scripted;
    scripted.base_script = random_script(rng, *apps);
    if (rng() % 4 != 0) scripted.feedback_script = random_script(rng, *apps);
    def.tasks[task.task_id] = scripted;
    RecordingAgent agent(std::make_shared<ScriptedAgent>(def, true));

    SimEnvironment env(apps);
    EpisodeConfig config{1 + static_cast<int>(rng() % 3), 12};
    Episode e = run_episode(task, agent, oracle, env, config, store, run_id);
    if (e.attempts.size() > 1) ++retried;

    c.expect(agent.openings.size() == e.attempts.size(), "agent did not see every attempt");
    for (std::size_t k = 1; k < e.attempts.size() && k < agent.openings.size(); ++k) {
      ++pairs;
      const auto& prev = e.attempts[k - 1];
      Trajectory closed = store.load_trajectory(run_id, task.task_id, static_cast<int>(k - 1));
      auto stored_verdict = records.load_verdict(prev.trajectory_id, "oracle");
      c.expect(closed.final_screenshot.sidecar_hash.has_value(), "closing frame without sidecar");
      c.expect(agent.openings[k].sidecar_hash == closed.final_screenshot.sidecar_hash.value_or("?"),
               "opening of attempt " + std::to_string(k) + " differs from closing sidecar in " +
                   e.episode_id);
      c.expect(e.attempts[k].opening_state_hash == prev.closing_state_hash, "recorded hashes differ");
      c.expect(stored_verdict && agent.openings[k].feedback == stored_verdict->rationale,
               "feedback differs from prior rationale in " + e.episode_id);
      c.expect(e.attempts[k].feedback == prev.verdict.rationale, "recorded feedback differs");
    }
    c.expect(!agent.openings.empty() && !agent.openings[0].feedback, "attempt 0 received feedback");
  }
  // The shipped fixture episodes too.
  auto fixture = testing::run_sample("flaky_oracle", dir / "fixture", "fixture");
  for (const auto& e : fixture.episodes) {
    for (std::size_t k = 1; k < e.attempts.size(); ++k) {
      ++pairs;
      c.expect(e.attempts[k].opening_state_hash == e.attempts[k - 1].closing_state_hash,
               "fixture continuity broken in " + e.task_id);
      c.expect(e.attempts[k].feedback == e.attempts[k - 1].verdict.rationale,
               "fixture feedback broken in " + e.task_id);
    }
  }
  c.expect(retried >= kEpisodes / 2, "too few retried episodes: " + std::to_string(retried));
  double elapsed = seconds_since(start);
  return {c.ok(), c.ok() ? std::to_string(kEpisodes) + " random episodes (" + std::to_string(retried) +
                               " retried), " + std::to_string(pairs) +
                               " attempt boundaries checked (" + fmt_seconds(elapsed) + ")"
                         : c.summary()};
}

// 7. Raw response corpus.
Outcome parser_suite() {
  Check c;
  json fixtures = json::parse(read_file(testing::source_dir() / "tests" / "fixtures" / "parser_responses.json"));
  std::map<std::string, int> by_path;
  for (const auto& f : fixtures) {
    std::string id = f.at("id");
    Verdict v = parse_verdict(f.at("response").get<std::string>(), "vlm");
    std::string path = to_string(v.parse_path);
    ++by_path[path];
    c.expect(path == f.at("expected_path").get<std::string>(), id + " took " + path);
    if (v.is_error()) {
      // An unusable answer carries no done flag at all.
      c.expect(to_json(v).at("done").is_null(), id + " serialized a done flag");
      c.expect(f.at("expected_done").is_null(), id + " expected a verdict");
    } else {
      c.expect(!f.at("expected_done").is_null() && v.done == f.at("expected_done").get<bool>(),
               id + " done mismatch");
    }
  }
  c.expect(fixtures.size() == 20, "fixture count " + std::to_string(fixtures.size()));
  std::ostringstream detail;
  detail << fixtures.size() << " fixtures:";
  for (const auto& [p, n] : by_path) detail << ' ' << p << '=' << n;
  return {c.ok(), c.ok() ? detail.str() : c.summary()};
}

void flip_byte(const fs::path& p, std::size_t offset) {
  std::string data = read_file(p);
  data[offset] = static_cast<char>(data[offset] ^ 0x5a);
  std::FILE* f = std::fopen(p.c_str(), "wb");
  std::fwrite(data.data(), 1, data.size(), f);
  std::fclose(f);
}

// 8. Trajectory round trip and corruption detection.
Outcome trajectory_integrity() {
  auto start = Clock::now();
  testing::TempDir dir;
  testing::run_sample("flaky_oracle", dir.path(), "flaky");
  testing::run_sample("scripted_oracle", dir.path(), "scripted");
  TrajectoryStore store(dir.path());
  Check c;
  struct Attempt {
    std::string run, task;
    int k;
  };
  std::vector<Attempt> attempts;
  int trajectories = 0;
  for (const auto& run : store.list_runs()) {
    for (const auto& task : store.list_episode_tasks(run)) {
      for (int k : store.list_attempts(run, task)) {
        ++trajectories;
        attempts.push_back({run, task, k});
        Trajectory t = store.load_trajectory(run, task, k);
        c.expect(trajectory_from_json(to_json(t)) == t, "round trip differs for " + t.trajectory_id);
        json on_disk = json::parse(read_file(store.attempt_dir(run, task, k) / "manifest.json"));
        c.expect(trajectory_from_json(on_disk) == t, "manifest differs for " + t.trajectory_id);
        Screenshot shot = store.read_screenshot(run, task, k, t.final_screenshot);
        c.expect(sha256_hex(shot.png) == t.final_screenshot.content_hash, "final frame digest");
      }
    }
  }

  std::mt19937_64 rng(8);
  constexpr int kTrials = 1000;
  int detected = 0;
  for (int trial = 0; trial < kTrials; ++trial) {
    const Attempt& a = attempts[rng() % attempts.size()];
    std::vector<fs::path> pngs;
    for (const auto& e : fs::directory_iterator(store.attempt_dir(a.run, a.task, a.k) / "screenshots")) {
      if (e.path().extension() == ".png") pngs.push_back(e.path());
    }
    std::sort(pngs.begin(), pngs.end());
    const fs::path& png = pngs[rng() % pngs.size()];
    std::size_t offset = rng() % fs::file_size(png);
    flip_byte(png, offset);
    try {
      store.load_trajectory(a.run, a.task, a.k);
      c.expect(false, "undetected flip in " + png.string() + " at " + std::to_string(offset));
    } catch (const Error& e) {
      bool named = std::string(e.what()).find(png.filename().string()) != std::string::npos;
      c.expect(e.code() == ErrorCode::kIntegrity && named, std::string("wrong error: ") + e.what());
      detected += e.code() == ErrorCode::kIntegrity && named;
    }
    flip_byte(png, offset);
  }
  double elapsed = seconds_since(start);
  return {c.ok(), c.ok() ? std::to_string(trajectories) + " trajectories round-tripped; " +
                               std::to_string(detected) + "/" + std::to_string(kTrials) +
                               " single-byte screenshot flips detected (" + fmt_seconds(elapsed) + ")"
                         : c.summary()};
}

int cli_exit(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return cli_main(args, out, err);
}

// 9. Corpus gate.
Outcome corpus_gate() {
  Check c;
  std::mt19937_64 rng(9);
  int trials = 0;
  for (int i = 0; i < 400; ++i) {
    int apps = i == 0 ? 42 : 40 + static_cast<int>(rng() % 5);
    std::vector<int> shape(static_cast<std::size_t>(apps), 30);
    if (i > 0 && rng() % 2) {
      int changes = 1 + static_cast<int>(rng() % 3);
      for (int k = 0; k < changes; ++k) shape[rng() % shape.size()] += static_cast<int>(rng() % 5) - 2;
    }
    for (auto& n : shape) n = std::max(n, 0);
    bool exact = apps == 42 && std::all_of(shape.begin(), shape.end(), [](int n) { return n == 30; });
    Corpus corpus = testing::synthetic_corpus(shape);
    ValidationReport full = validate_corpus(corpus, CorpusProfile::full());
    c.expect(full.passed == exact, "full profile verdict wrong for shape #" + std::to_string(i));
    c.expect(validate_corpus(corpus, CorpusProfile::unconstrained()).passed, "unconstrained failed");
    ++trials;
  }

  testing::TempDir dir;
  write_corpus(testing::synthetic_corpus(std::vector<int>(42, 30)), dir / "exact");
  std::vector<int> off(42, 30);
  off[17] = 29;
  write_corpus(testing::synthetic_corpus(off), dir / "short");
  std::string sample = testing::sample_corpus_dir().string();
  std::string report = (dir / "report.json").string();
  int exact = cli_exit({"validate", (dir / "exact").string(), "--profile", "full", "--out", report});
  int short_by_one = cli_exit({"validate", (dir / "short").string(), "--profile", "full", "--out", report});
  int sample_full = cli_exit({"validate", sample, "--profile", "full", "--out", report});
  int sample_open = cli_exit({"validate", sample, "--profile", "unconstrained", "--out", report});
  c.expect(exact == kExitOk, "42x30 corpus rejected");
  c.expect(short_by_one == kExitValidation, "1259-task corpus accepted");
  c.expect(sample_full == kExitValidation, "sample passed full");
  c.expect(sample_open == kExitOk, "sample failed unconstrained");
  return {c.ok(), c.ok() ? std::to_string(trials) + " shapes checked; validate exit codes 42x30=" +
                               std::to_string(exact) + ", one short=" + std::to_string(short_by_one) +
                               ", sample full=" + std::to_string(sample_full) +
                               ", sample unconstrained=" + std::to_string(sample_open)
                         : c.summary()};
}

}  // namespace
}  // namespace cuaeval

int main() {
  using namespace cuaeval;
  struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> criteria = {
      {1, "oracle fidelity", oracle_fidelity},
      {2, "feedback lift", feedback_lift},
      {3, "noisy judge calibration", noisy_calibration},
      {4, "metrics recount", metrics_equivalence},
      {5, "table and csv reproduction", table_reproduction},
      {6, "retry state continuity", retry_continuity},
      {7, "parser suite", parser_suite},
      {8, "trajectory integrity", trajectory_integrity},
      {9, "corpus gate", corpus_gate},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << c.number << ": " << c.name
              << " - " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
