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

// Judge accuracy, success rates and their aggregates. Everything here is a
// pure function over records; fractions are exact.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuaeval/corpus.hpp"
#include "cuaeval/judge.hpp"
#include "cuaeval/run_records.hpp"

namespace cuaeval {

// Reduced fraction with a positive denominator.
class Ratio {
 public:
  Ratio() = default;
  Ratio(std::int64_t num, std::int64_t den);  // throws on den == 0

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  /// "num/den"
  std::string str() const;
  /// Decimal rounded half away from zero.
  std::string fixed(int digits) const;

  Ratio operator+(const Ratio& o) const;
  Ratio operator-(const Ratio& o) const;
  Ratio operator*(const Ratio& o) const;
  Ratio operator/(const Ratio& o) const;
  bool operator==(const Ratio&) const = default;
  bool operator<(const Ratio& o) const;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

nlohmann::json to_json(const Ratio& r);  // {"num","den","value"}
Ratio ratio_from_json(const nlohmann::json& j);

struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
  std::int64_t excluded = 0;  // parse/transport errors

  std::int64_t n_used() const { return tp + fp + tn + fn; }
  std::int64_t total() const { return n_used() + excluded; }
  /// Undefined when nothing was usable.
  std::optional<Ratio> accuracy() const;
  bool operator==(const ConfusionMatrix&) const = default;
};

struct AccuracyResult {
  ConfusionMatrix matrix;
  std::optional<Ratio> accuracy;
  std::int64_t n_used = 0;
  std::int64_t n_excluded = 0;
  std::int64_t unmatched = 0;  // verdicts with no truth entry
};

/// Joins on trajectory_id; positive class is done. Throws kFailedPrecondition
/// when no verdict has a truth entry.
AccuracyResult judge_accuracy(const std::map<std::string, Verdict>& verdicts,
                              const std::map<std::string, bool>& truth);

enum class TruthSource { kJudgeVerdict, kOracle, kHuman };

const char* to_string(TruthSource t);
/// Accepts "judge", "judge_verdict", "oracle", "human".
TruthSource truth_source_from_string(const std::string& s);

struct SuccessRates {
  Ratio before;
  Ratio after;
  std::int64_t n_tasks = 0;
  std::optional<Ratio> relative_improvement;  // undefined when before == 0
  Ratio absolute_delta;

  bool operator==(const SuccessRates&) const = default;
};

/// (after - before) / before; nullopt when before is zero.
std::optional<Ratio> relative_improvement(const Ratio& before, const Ratio& after);

SuccessRates make_success_rates(std::int64_t successes_before, std::int64_t successes_after,
                                std::int64_t n_tasks);

/// `human` maps trajectory_id to the adjudicated label; needed for kHuman.
/// Throws kFailedPrecondition naming the first episode without truth.
SuccessRates success_rates(const std::vector<Episode>& episodes, TruthSource source,
                           const std::map<std::string, bool>* human = nullptr);

/// Success under another evaluator's verdicts on the same trajectories: attempt
/// 0 and the last attempt of each episode. Error or missing verdicts count as
/// not successful.
SuccessRates success_rates_for_evaluator(const std::vector<Episode>& episodes,
                                         const std::map<std::string, Verdict>& verdicts);

/// Majority of the latest label per annotator; ties leave the trajectory
/// without human truth.
std::map<std::string, bool> adjudicate_labels(const std::vector<HumanLabel>& labels);

struct MacroAverage {
  Ratio mean;
  std::int64_t group_count = 0;
  std::vector<std::string> groups;
  std::vector<Ratio> values;
  bool operator==(const MacroAverage&) const = default;
};

/// Unweighted mean. Throws kInvalidArgument on empty input.
Ratio macro_average(const std::vector<Ratio>& values);
/// Mean weighted by `weights` (e.g. task counts).
Ratio weighted_average(const std::vector<Ratio>& values, const std::vector<std::int64_t>& weights);

}  // namespace cuaeval
