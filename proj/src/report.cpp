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

#include "cuaeval/report.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "cuaeval/error.hpp"
#include "cuaeval/util.hpp"

namespace cuaeval {

namespace fs = std::filesystem;
using nlohmann::json;

const AccuracyCell* MetricsReport::find_accuracy(const std::string& agent,
                                                 const std::string& evaluator) const {
  for (const auto& c : accuracy) {
    if (c.agent_id == agent && c.evaluator_id == evaluator) return &c;
  }
  return nullptr;
}

const SuccessCell* MetricsReport::find_success(const std::string& agent,
                                               const std::string& evaluator) const {
  for (const auto& c : success) {
    if (c.agent_id == agent && c.evaluator_id == evaluator) return &c;
  }
  return nullptr;
}

namespace {

json opt_ratio(const std::optional<Ratio>& r) {
  return r ? to_json(*r) : json("undefined");
}

std::optional<Ratio> opt_ratio_from(const json& j) {
  if (j.is_string() || j.is_null()) return std::nullopt;
  return ratio_from_json(j);
}

json to_json(const ConfusionMatrix& m) {
  return {{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}, {"excluded", m.excluded}};
}

ConfusionMatrix matrix_from_json(const json& j) {
  return {j.at("tp").get<std::int64_t>(), j.at("fp").get<std::int64_t>(),
          j.at("tn").get<std::int64_t>(), j.at("fn").get<std::int64_t>(),
          j.at("excluded").get<std::int64_t>()};
}

json to_json(const SuccessRates& s) {
  return {{"before", to_json(s.before)},
          {"after", to_json(s.after)},
          {"n_tasks", s.n_tasks},
          {"relative_improvement", opt_ratio(s.relative_improvement)},
          {"absolute_delta", to_json(s.absolute_delta)}};
}

SuccessRates rates_from_json(const json& j) {
  SuccessRates s;
  s.before = ratio_from_json(j.at("before"));
  s.after = ratio_from_json(j.at("after"));
  s.n_tasks = j.at("n_tasks").get<std::int64_t>();
  s.relative_improvement = opt_ratio_from(j.at("relative_improvement"));
  s.absolute_delta = ratio_from_json(j.at("absolute_delta"));
  return s;
}

json to_json(const MacroAverage& m) {
  json values = json::array();
  for (const auto& v : m.values) values.push_back(to_json(v));
  return {{"mean", to_json(m.mean)},
          {"group_count", m.group_count},
          {"groups", m.groups},
          {"values", values}};
}

MacroAverage macro_from_json(const json& j) {
  MacroAverage m;
  m.mean = ratio_from_json(j.at("mean"));
  m.group_count = j.at("group_count").get<std::int64_t>();
  m.groups = j.at("groups").get<std::vector<std::string>>();
  for (const auto& v : j.at("values")) m.values.push_back(ratio_from_json(v));
  return m;
}

std::optional<MacroAverage> average_of(const std::vector<std::string>& groups,
                                       const std::vector<Ratio>& values,
                                       const std::vector<std::int64_t>& weights,
                                       bool task_weighted) {
  if (values.empty()) return std::nullopt;
  MacroAverage m;
  m.groups = groups;
  m.values = values;
  m.group_count = static_cast<std::int64_t>(values.size());
  m.mean = task_weighted ? weighted_average(values, weights) : macro_average(values);
  return m;
}

}  // namespace

json to_json(const MetricsReport& r) {
  json acc = json::array();
  for (const auto& c : r.accuracy) {
    acc.push_back({{"agent_id", c.agent_id},
                   {"evaluator_id", c.evaluator_id},
                   {"matrix", to_json(c.matrix)},
                   {"accuracy", opt_ratio(c.accuracy)},
                   {"n_used", c.matrix.n_used()},
                   {"n_excluded", c.matrix.excluded},
                   {"unmatched", c.unmatched}});
  }
  json succ = json::array();
  for (const auto& c : r.success) {
    succ.push_back(
        {{"agent_id", c.agent_id}, {"evaluator_id", c.evaluator_id}, {"rates", to_json(c.rates)}});
  }
  json by_eval = json::object();
  for (const auto& [k, m] : r.improvement_across_agents) by_eval[k] = to_json(m);
  json acc_by_eval = json::object();
  for (const auto& [k, m] : r.accuracy_across_agents) acc_by_eval[k] = to_json(m);
  return {{"run_ids", r.run_ids},
          {"corpus_hashes", r.corpus_hashes},
          {"truth_source", r.truth_source},
          {"weighting", r.weighting},
          {"agents", r.agents},
          {"evaluators", r.evaluators},
          {"accuracy", acc},
          {"success_rates", succ},
          {"macro",
           {{"improvement_across_agents", by_eval},
            {"improvement_across_cells", r.improvement_across_cells
                                             ? to_json(*r.improvement_across_cells)
                                             : json("undefined")},
            {"accuracy_across_agents", acc_by_eval}}}};
}

MetricsReport metrics_report_from_json(const json& j) {
  try {
    MetricsReport r;
    r.run_ids = j.at("run_ids").get<std::vector<std::string>>();
    r.corpus_hashes = j.at("corpus_hashes").get<std::vector<std::string>>();
    r.truth_source = j.at("truth_source").get<std::string>();
    r.weighting = j.at("weighting").get<std::string>();
    r.agents = j.at("agents").get<std::vector<std::string>>();
    r.evaluators = j.at("evaluators").get<std::vector<std::string>>();
    for (const auto& c : j.at("accuracy")) {
      r.accuracy.push_back({c.at("agent_id").get<std::string>(),
                            c.at("evaluator_id").get<std::string>(),
                            matrix_from_json(c.at("matrix")), opt_ratio_from(c.at("accuracy")),
                            c.at("unmatched").get<std::int64_t>()});
    }
    for (const auto& c : j.at("success_rates")) {
      r.success.push_back({c.at("agent_id").get<std::string>(),
                           c.at("evaluator_id").get<std::string>(),
                           rates_from_json(c.at("rates"))});
    }
    const json& macro = j.at("macro");
    for (const auto& [k, m] : macro.at("improvement_across_agents").items()) {
      r.improvement_across_agents.emplace(k, macro_from_json(m));
    }
    if (macro.at("improvement_across_cells").is_object()) {
      r.improvement_across_cells = macro_from_json(macro.at("improvement_across_cells"));
    }
    for (const auto& [k, m] : macro.at("accuracy_across_agents").items()) {
      r.accuracy_across_agents.emplace(k, macro_from_json(m));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed metrics report: ") + e.what());
  }
}

RunData RunData::load(const TrajectoryStore& store, const std::string& run_id) {
  RunRecords records(store);
  RunData d;
  d.manifest = records.load_run_manifest(run_id);
  d.episodes = records.load_episodes(run_id);
  for (const auto& ev : records.list_evaluators(run_id)) {
    d.verdicts.emplace(ev, records.load_verdicts(run_id, ev));
  }
  return d;
}

MetricsReport build_report(const std::vector<RunData>& runs, const ReportOptions& options) {
  if (runs.empty()) throw Error(ErrorCode::kInvalidArgument, "no runs to report on");
  MetricsReport r;
  r.truth_source = to_string(options.truth);
  r.weighting = options.task_weighted ? "task_weighted" : "unweighted";
  std::set<std::string> agents, evaluators, hashes;

  for (const auto& run : runs) {
    r.run_ids.push_back(run.manifest.run_id);
    hashes.insert(run.manifest.corpus_hash);
    const std::string& agent = run.manifest.agent_id;
    if (agents.count(agent)) {
      throw Error(ErrorCode::kInvalidArgument, "agent '" + agent + "' appears in two runs");
    }
    agents.insert(agent);
    if (run.episodes.empty()) {
      throw Error(ErrorCode::kFailedPrecondition,
                  "run '" + run.manifest.run_id + "' has no episode records");
    }

    // Truth per trajectory for this run.
    std::map<std::string, bool> truth;
    for (const auto& e : run.episodes) {
      for (const auto& a : e.attempts) {
        switch (options.truth) {
          case TruthSource::kOracle:
            if (!a.ground_truth) {
              throw Error(ErrorCode::kFailedPrecondition,
                          "truth source oracle unavailable for " + a.trajectory_id);
            }
            truth[a.trajectory_id] = *a.ground_truth;
            break;
          case TruthSource::kJudgeVerdict:
            if (!a.verdict.is_error()) truth[a.trajectory_id] = a.verdict.done;
            break;
          case TruthSource::kHuman:
            if (auto it = options.human.find(a.trajectory_id); it != options.human.end()) {
              truth[a.trajectory_id] = it->second;
            }
            break;
        }
      }
    }

    for (const auto& [ev, verdicts] : run.verdicts) {
      evaluators.insert(ev);
      AccuracyResult acc = judge_accuracy(verdicts, truth);
      r.accuracy.push_back({agent, ev, acc.matrix, acc.accuracy, acc.unmatched});
      r.success.push_back({agent, ev, success_rates_for_evaluator(run.episodes, verdicts)});
    }
    r.success.push_back(
        {agent, kBaselineRow, success_rates(run.episodes, options.truth, &options.human)});
  }
  r.agents.assign(agents.begin(), agents.end());
  r.evaluators.assign(evaluators.begin(), evaluators.end());
  r.corpus_hashes.assign(hashes.begin(), hashes.end());

  auto by_cell = [](const auto& a, const auto& b) {
    return std::tie(a.evaluator_id, a.agent_id) < std::tie(b.evaluator_id, b.agent_id);
  };
  std::sort(r.accuracy.begin(), r.accuracy.end(), by_cell);
  std::sort(r.success.begin(), r.success.end(), by_cell);

  std::vector<std::string> rows = r.evaluators;
  rows.push_back(kBaselineRow);
  std::vector<std::string> cell_groups;
  std::vector<Ratio> cell_values;
  std::vector<std::int64_t> cell_weights;
  for (const auto& ev : rows) {
    std::vector<std::string> groups;
    std::vector<Ratio> values;
    std::vector<std::int64_t> weights;
    for (const auto& agent : r.agents) {
      const SuccessCell* c = r.find_success(agent, ev);
      if (c == nullptr || !c->rates.relative_improvement) continue;
      groups.push_back(agent);
      values.push_back(*c->rates.relative_improvement);
      weights.push_back(c->rates.n_tasks);
      if (ev != kBaselineRow) {
        cell_groups.push_back(agent + "/" + ev);
        cell_values.push_back(values.back());
        cell_weights.push_back(weights.back());
      }
    }
    if (auto m = average_of(groups, values, weights, options.task_weighted)) {
      r.improvement_across_agents.emplace(ev, *m);
    }
  }
  r.improvement_across_cells =
      average_of(cell_groups, cell_values, cell_weights, options.task_weighted);

  for (const auto& ev : r.evaluators) {
    std::vector<std::string> groups;
    std::vector<Ratio> values;
    std::vector<std::int64_t> weights;
    for (const auto& agent : r.agents) {
      const AccuracyCell* c = r.find_accuracy(agent, ev);
      if (c == nullptr || !c->accuracy) continue;
      groups.push_back(agent);
      values.push_back(*c->accuracy);
      weights.push_back(c->matrix.n_used());
    }
    if (auto m = average_of(groups, values, weights, options.task_weighted)) {
      r.accuracy_across_agents.emplace(ev, *m);
    }
  }
  return r;
}

std::string render_accuracy_table(const MetricsReport& r) {
  std::ostringstream out;
  out << "| Evaluator |";
  for (const auto& a : r.agents) out << ' ' << a << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < r.agents.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& ev : r.evaluators) {
    out << "| " << ev << " |";
    for (const auto& a : r.agents) {
      const AccuracyCell* c = r.find_accuracy(a, ev);
      out << ' ' << (c && c->accuracy ? c->accuracy->fixed(2) : std::string("n/a")) << " |";
    }
    out << '\n';
  }
  out << "\nCounts as tp/fp/tn/fn (excluded), truth source: " << r.truth_source << "\n\n";
  out << "| Evaluator |";
  for (const auto& a : r.agents) out << ' ' << a << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < r.agents.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& ev : r.evaluators) {
    out << "| " << ev << " |";
    for (const auto& a : r.agents) {
      const AccuracyCell* c = r.find_accuracy(a, ev);
      if (c == nullptr) {
        out << " n/a |";
        continue;
      }
      const auto& m = c->matrix;
      out << ' ' << m.tp << '/' << m.fp << '/' << m.tn << '/' << m.fn << " (" << m.excluded
          << ") |";
    }
    out << '\n';
  }
  return out.str();
}

std::string render_success_csv(const MetricsReport& r) {
  std::ostringstream out;
  out << "agent_id,evaluator_id,before,after,relative_improvement,n_tasks\n";
  std::vector<std::string> rows = r.evaluators;
  rows.push_back(kBaselineRow);
  for (const auto& a : r.agents) {
    for (const auto& ev : rows) {
      const SuccessCell* c = r.find_success(a, ev);
      if (c == nullptr) continue;
      const auto& s = c->rates;
      out << a << ',' << ev << ',' << s.before.fixed(4) << ',' << s.after.fixed(4) << ','
          << (s.relative_improvement ? s.relative_improvement->fixed(4) : "undefined") << ','
          << s.n_tasks << '\n';
    }
  }
  return out.str();
}

std::vector<fs::path> emit_report(const MetricsReport& r, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> out = {dir / "report.json", dir / "accuracy_table.md",
                               dir / "success_rates.csv"};
  write_file_atomic(out[0], to_json(r).dump(2) + "\n");
  write_file_atomic(out[1], render_accuracy_table(r));
  write_file_atomic(out[2], render_success_csv(r));
  return out;
}

}  // namespace cuaeval
