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

#include "cuaeval/metrics.hpp"

#include <numeric>

#include "cuaeval/error.hpp"

namespace cuaeval {

using nlohmann::json;

namespace {

__extension__ typedef __int128 i128;

std::int64_t narrow(i128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw Error(ErrorCode::kInvalidArgument, "ratio overflow");
  return static_cast<std::int64_t>(v);
}

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Ratio reduce(i128 num, i128 den) {
  if (den == 0) throw Error(ErrorCode::kInvalidArgument, "ratio with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Ratio(narrow(num), narrow(den));
}

}  // namespace

Ratio::Ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorCode::kInvalidArgument, "ratio with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num, den);
  num_ = g > 1 ? num / g : num;
  den_ = g > 1 ? den / g : den;
}

std::string Ratio::str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

std::string Ratio::fixed(int digits) const {
  i128 scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  i128 n = num_ < 0 ? -static_cast<i128>(num_) : static_cast<i128>(num_);
  i128 scaled = (n * scale * 2 + den_) / (2 * static_cast<i128>(den_));
  i128 whole = scaled / scale;
  i128 frac = scaled % scale;
  std::string out = (num_ < 0 && scaled != 0) ? "-" : "";
  out += std::to_string(static_cast<long long>(whole));
  if (digits > 0) {
    std::string f = std::to_string(static_cast<long long>(frac));
    out += "." + std::string(static_cast<std::size_t>(digits) - f.size(), '0') + f;
  }
  return out;
}

Ratio Ratio::operator+(const Ratio& o) const {
  return reduce(i128(num_) * o.den_ + i128(o.num_) * den_, i128(den_) * o.den_);
}
Ratio Ratio::operator-(const Ratio& o) const {
  return reduce(i128(num_) * o.den_ - i128(o.num_) * den_, i128(den_) * o.den_);
}
Ratio Ratio::operator*(const Ratio& o) const {
  return reduce(i128(num_) * o.num_, i128(den_) * o.den_);
}
Ratio Ratio::operator/(const Ratio& o) const {
  if (o.num_ == 0) throw Error(ErrorCode::kInvalidArgument, "division by a zero ratio");
  return reduce(i128(num_) * o.den_, i128(den_) * o.num_);
}
bool Ratio::operator<(const Ratio& o) const {
  return i128(num_) * o.den_ < i128(o.num_) * den_;
}

json to_json(const Ratio& r) {
  return {{"num", r.num()}, {"den", r.den()}, {"value", r.value()}};
}

Ratio ratio_from_json(const json& j) {
  return Ratio(j.at("num").get<std::int64_t>(), j.at("den").get<std::int64_t>());
}

std::optional<Ratio> ConfusionMatrix::accuracy() const {
  if (n_used() == 0) return std::nullopt;
  return Ratio(tp + tn, n_used());
}

AccuracyResult judge_accuracy(const std::map<std::string, Verdict>& verdicts,
                              const std::map<std::string, bool>& truth) {
  AccuracyResult r;
  std::int64_t joined = 0;
  for (const auto& [id, v] : verdicts) {
    auto t = truth.find(id);
    if (t == truth.end()) {
      ++r.unmatched;
      continue;
    }
    ++joined;
    if (v.is_error()) {
      ++r.matrix.excluded;
    } else if (v.done) {
      (t->second ? r.matrix.tp : r.matrix.fp)++;
    } else {
      (t->second ? r.matrix.fn : r.matrix.tn)++;
    }
  }
  if (joined == 0) {
    throw Error(ErrorCode::kFailedPrecondition,
                "accuracy undefined: no verdict shares a trajectory with the truth set");
  }
  r.accuracy = r.matrix.accuracy();
  r.n_used = r.matrix.n_used();
  r.n_excluded = r.matrix.excluded;
  return r;
}

const char* to_string(TruthSource t) {
  switch (t) {
    case TruthSource::kJudgeVerdict: return "judge_verdict";
    case TruthSource::kOracle: return "oracle";
    case TruthSource::kHuman: return "human";
  }
  return "oracle";
}

TruthSource truth_source_from_string(const std::string& s) {
  if (s == "judge" || s == "judge_verdict") return TruthSource::kJudgeVerdict;
  if (s == "oracle") return TruthSource::kOracle;
  if (s == "human") return TruthSource::kHuman;
  throw Error(ErrorCode::kInvalidArgument, "unknown truth source '" + s + "'");
}

std::optional<Ratio> relative_improvement(const Ratio& before, const Ratio& after) {
  if (before.num() == 0) return std::nullopt;
  return (after - before) / before;
}

SuccessRates make_success_rates(std::int64_t successes_before, std::int64_t successes_after,
                                std::int64_t n_tasks) {
  if (n_tasks <= 0) throw Error(ErrorCode::kInvalidArgument, "success rates need tasks");
  SuccessRates s;
  s.n_tasks = n_tasks;
  s.before = Ratio(successes_before, n_tasks);
  s.after = Ratio(successes_after, n_tasks);
  s.relative_improvement = relative_improvement(s.before, s.after);
  s.absolute_delta = s.after - s.before;
  return s;
}

SuccessRates success_rates(const std::vector<Episode>& episodes, TruthSource source,
                           const std::map<std::string, bool>* human) {
  if (episodes.empty()) throw Error(ErrorCode::kInvalidArgument, "no episodes");
  std::int64_t before = 0, after = 0;
  for (const auto& e : episodes) {
    if (e.attempts.empty()) {
      throw Error(ErrorCode::kFailedPrecondition, "episode '" + e.episode_id + "' has no attempts");
    }
    const auto& first = e.attempts.front();
    const auto& last = e.attempts.back();
    bool b = false, a = false;
    switch (source) {
      case TruthSource::kJudgeVerdict:
        b = e.baseline_success;
        a = e.final_success;
        break;
      case TruthSource::kOracle:
        if (!first.ground_truth || !last.ground_truth) {
          throw Error(ErrorCode::kFailedPrecondition,
                      "episode '" + e.episode_id + "' has no oracle ground truth");
        }
        b = *first.ground_truth;
        a = *last.ground_truth;
        break;
      case TruthSource::kHuman: {
        if (human == nullptr) {
          throw Error(ErrorCode::kFailedPrecondition, "human truth requested without labels");
        }
        auto fb = human->find(first.trajectory_id);
        auto fa = human->find(last.trajectory_id);
        if (fb == human->end() || fa == human->end()) {
          throw Error(ErrorCode::kFailedPrecondition,
                      "episode '" + e.episode_id + "' lacks a human label on " +
                          (fb == human->end() ? first.trajectory_id : last.trajectory_id));
        }
        b = fb->second;
        a = fa->second;
        break;
      }
    }
    before += b;
    after += a;
  }
  return make_success_rates(before, after, static_cast<std::int64_t>(episodes.size()));
}

SuccessRates success_rates_for_evaluator(const std::vector<Episode>& episodes,
                                         const std::map<std::string, Verdict>& verdicts) {
  if (episodes.empty()) throw Error(ErrorCode::kInvalidArgument, "no episodes");
  auto ok = [&](const std::string& id) {
    auto it = verdicts.find(id);
    return it != verdicts.end() && !it->second.is_error() && it->second.done;
  };
  std::int64_t before = 0, after = 0;
  for (const auto& e : episodes) {
    if (e.attempts.empty()) continue;
    before += ok(e.attempts.front().trajectory_id);
    after += ok(e.attempts.back().trajectory_id);
  }
  return make_success_rates(before, after, static_cast<std::int64_t>(episodes.size()));
}

std::map<std::string, bool> adjudicate_labels(const std::vector<HumanLabel>& labels) {
  std::map<std::string, std::pair<int, int>> votes;  // done, not_done
  for (const auto& l : latest_labels(labels)) {
    auto& v = votes[l.trajectory_id];
    (l.label == Label::kDone ? v.first : v.second)++;
  }
  std::map<std::string, bool> out;
  for (const auto& [id, v] : votes) {
    if (v.first != v.second) out.emplace(id, v.first > v.second);
  }
  return out;
}

Ratio macro_average(const std::vector<Ratio>& values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "macro average of no groups");
  Ratio sum(0, 1);
  for (const auto& v : values) sum = sum + v;
  return sum / Ratio(static_cast<std::int64_t>(values.size()), 1);
}

Ratio weighted_average(const std::vector<Ratio>& values,
                       const std::vector<std::int64_t>& weights) {
  if (values.empty() || values.size() != weights.size()) {
    throw Error(ErrorCode::kInvalidArgument, "weighted average needs one weight per value");
  }
  Ratio sum(0, 1);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] < 0) throw Error(ErrorCode::kInvalidArgument, "negative weight");
    sum = sum + values[i] * Ratio(weights[i], 1);
    total += weights[i];
  }
  if (total == 0) throw Error(ErrorCode::kInvalidArgument, "weights sum to zero");
  return sum / Ratio(total, 1);
}

}  // namespace cuaeval
