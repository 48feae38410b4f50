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

// In-memory run records for metrics tests.

#pragma once

#include <string>
#include <vector>

#include "cuaeval/report.hpp"

namespace cuaeval::testing {

inline Verdict make_verdict(const std::string& evaluator, bool done,
                            ParsePath path = ParsePath::kOracle) {
  Verdict v;
  v.evaluator_id = evaluator;
  v.done = done;
  v.parse_path = path;
  v.prompt_template_version = kPromptTemplateVersion;
  return v;
}

// One episode per entry of `truths`, one attempt per truth value. The run's
// own evaluator is an oracle whose verdicts equal the truth.
inline RunData synthetic_run(const std::string& run_id, const std::string& agent,
                             const std::vector<std::vector<bool>>& truths) {
  RunData d;
  d.manifest.run_id = run_id;
  d.manifest.agent_id = agent;
  d.manifest.evaluator_id = "oracle";
  d.manifest.corpus_hash = "synthetic";
  auto& oracle = d.verdicts["oracle"];
  for (std::size_t i = 0; i < truths.size(); ++i) {
    Episode e;
    e.run_id = run_id;
    e.task_id = "task" + std::to_string(1000 + i);
    e.episode_id = make_episode_id(run_id, e.task_id);
    e.agent_id = agent;
    e.evaluator_id = "oracle";
    for (std::size_t k = 0; k < truths[i].size(); ++k) {
      AttemptRecord a;
      a.attempt_index = static_cast<int>(k);
      a.trajectory_id = make_trajectory_id(run_id, e.task_id, a.attempt_index);
      a.ground_truth = truths[i][k];
      a.verdict = make_verdict("oracle", truths[i][k]);
      oracle[a.trajectory_id] = a.verdict;
      e.attempts.push_back(a);
    }
    e.baseline_success = e.attempts.front().verdict.done;
    e.final_success = e.attempts.back().verdict.done;
    e.ground_truth = e.attempts.back().ground_truth;
    d.episodes.push_back(std::move(e));
  }
  return d;
}

}  // namespace cuaeval::testing
