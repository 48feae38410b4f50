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

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuaeval/metrics.hpp"
#include "cuaeval/run_records.hpp"

namespace cuaeval {

// Evaluator id of the per-agent row that carries ground-truth success.
inline constexpr const char* kBaselineRow = "baseline";

struct AccuracyCell {
  std::string agent_id;
  std::string evaluator_id;
  ConfusionMatrix matrix;
  std::optional<Ratio> accuracy;
  std::int64_t unmatched = 0;
  bool operator==(const AccuracyCell&) const = default;
};

struct SuccessCell {
  std::string agent_id;
  std::string evaluator_id;  // or kBaselineRow
  SuccessRates rates;
  bool operator==(const SuccessCell&) const = default;
};

struct MetricsReport {
  std::vector<std::string> run_ids;
  std::vector<std::string> corpus_hashes;
  std::string truth_source;
  std::string weighting = "unweighted";  // or "task_weighted"
  std::vector<std::string> agents;      // sorted
  std::vector<std::string> evaluators;  // sorted
  std::vector<AccuracyCell> accuracy;
  std::vector<SuccessCell> success;
  // Mean relative improvement across agents, per evaluator row.
  std::map<std::string, MacroAverage> improvement_across_agents;
  // Mean relative improvement across every (agent, evaluator) cell.
  std::optional<MacroAverage> improvement_across_cells;
  // Mean accuracy across agents, per evaluator.
  std::map<std::string, MacroAverage> accuracy_across_agents;

  const AccuracyCell* find_accuracy(const std::string& agent, const std::string& evaluator) const;
  const SuccessCell* find_success(const std::string& agent, const std::string& evaluator) const;
  bool operator==(const MetricsReport&) const = default;
};

nlohmann::json to_json(const MetricsReport& r);
MetricsReport metrics_report_from_json(const nlohmann::json& j);

// Everything metrics needs from one run.
struct RunData {
  RunManifest manifest;
  std::vector<Episode> episodes;
  std::map<std::string, std::map<std::string, Verdict>> verdicts;  // evaluator -> trajectory

  static RunData load(const TrajectoryStore& store, const std::string& run_id);
};

struct ReportOptions {
  TruthSource truth = TruthSource::kOracle;
  bool task_weighted = false;
  // trajectory_id -> adjudicated human label; required for kHuman.
  std::map<std::string, bool> human;
};

/// Throws kFailedPrecondition when the truth source is unavailable.
MetricsReport build_report(const std::vector<RunData>& runs, const ReportOptions& options);

/// Evaluators as rows, agents as columns, two decimals.
std::string render_accuracy_table(const MetricsReport& r);
/// agent_id,evaluator_id,before,after,relative_improvement,n_tasks
std::string render_success_csv(const MetricsReport& r);

/// Writes report.json, accuracy_table.md and success_rates.csv into `dir`.
std::vector<std::filesystem::path> emit_report(const MetricsReport& r,
                                               const std::filesystem::path& dir);

}  // namespace cuaeval
