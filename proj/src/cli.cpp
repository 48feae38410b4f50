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

#include "cuaeval/cli.hpp"

#include <signal.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <CLI11.hpp>

#include "cuaeval/corpus.hpp"
#include "cuaeval/error.hpp"
#include "cuaeval/feedback_loop.hpp"
#include "cuaeval/metrics.hpp"
#include "cuaeval/report.hpp"
#include "cuaeval/review_api.hpp"
#include "cuaeval/run_config.hpp"
#include "cuaeval/run_records.hpp"
#include "cuaeval/sim/app_def.hpp"
#include "cuaeval/sim/predicate.hpp"
#include "cuaeval/util.hpp"

namespace cuaeval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ValidateArgs {
  std::string corpus;
  std::string profile = "unconstrained";
  std::string out = "validation_report.json";
  std::string sim_apps;
  bool strict = false;
};

struct RunArgs {
  std::string config;
  std::string store;
  std::string sim_apps;
  std::string run_id;
  int parallelism = 0;
  std::int64_t seed = -1;
};

struct RejudgeArgs {
  std::string run_id;
  std::string judge;
  std::string config;
  std::string store = "store";
  std::string corpus;
};

struct MetricsArgs {
  std::vector<std::string> run_ids;
  std::string truth = "oracle";
  std::string out = "metrics";
  std::string store = "store";
  std::string labels;
  bool task_weighted = false;
};

struct ServeArgs {
  std::string store = "store";
  std::string bind = "127.0.0.1:8080";
  std::string ui;
  std::string labels;
};

struct ExportArgs {
  std::string store = "store";
  std::string labels;
  std::string out;
  bool all = false;
};

fs::path labels_path_for(const std::string& store, const std::string& labels) {
  return labels.empty() ? fs::path(store) / "labels.jsonl" : fs::path(labels);
}

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
  Corpus corpus;
  CorpusProfile profile;
  try {
    profile = CorpusProfile::named(a.profile);
    corpus = load_corpus(a.corpus, LoadOptions{a.strict});
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  ValidationReport report = validate_corpus(corpus, profile);
  if (!a.sim_apps.empty()) {
    try {
      auto apps = sim::load_app_defs(a.sim_apps);
      for (const auto& t : corpus.tasks) {
        if (!t.goal_predicate) continue;
        for (const auto& p : sim::closure_problems(sim::GoalPredicate::parse(*t.goal_predicate), apps)) {
          report.violations.push_back({"predicate_unresolved", t.task_id, p});
          report.passed = false;
        }
      }
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    }
  }
  json j = report.to_json();
  j["profile"] = a.profile;
  j["corpus_hash"] = corpus_hash(corpus);
  if (!corpus.warnings.empty()) j["warnings"] = corpus.warnings;
  out << j.dump(2) << '\n';
  try {
    write_file_atomic(a.out, j.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: cannot write report: " << e.what() << '\n';
    return kExitUsage;
  }
  return report.passed ? kExitOk : kExitValidation;
}

int cmd_run(const RunArgs& a, std::ostream& out) {
  RunConfig config = load_run_config(a.config);
  if (!a.store.empty()) config.store_root = a.store;
  if (!a.sim_apps.empty()) config.sim_apps_dir = a.sim_apps;
  if (!a.run_id.empty()) {
    if (!is_safe_id(a.run_id)) throw Error(ErrorCode::kInvalidArgument, "bad run id");
    config.run_id = a.run_id;
  }
  if (a.parallelism > 0) config.parallelism = a.parallelism;
  if (a.seed >= 0) config.seed = static_cast<std::uint64_t>(a.seed);
  PreparedRun run = prepare_run(config);
  fs::create_directories(config.store_root);
  TrajectoryStore store(config.store_root);
  BenchmarkResult result = execute_run(run, store);
  const RunManifest& m = result.manifest;
  auto rates = make_success_rates(m.baseline_successes(), m.final_successes(),
                                  static_cast<std::int64_t>(m.episodes.size()));
  out << "run_id: " << m.run_id << '\n'
      << "agent: " << m.agent_id << '\n'
      << "evaluator: " << m.evaluator_id << '\n'
      << "tasks: " << m.episodes.size() << '\n'
      << "baseline_successes: " << m.baseline_successes() << '\n'
      << "final_successes: " << m.final_successes() << '\n'
      << "success_before: " << rates.before.fixed(2) << '\n'
      << "success_after: " << rates.after.fixed(2) << '\n'
      << "relative_improvement: "
      << (rates.relative_improvement ? rates.relative_improvement->fixed(2) : "undefined") << '\n'
      << "determinism_digest: " << m.determinism_digest << '\n';
  return kExitOk;
}

json read_judge_spec(const RejudgeArgs& a) {
  std::string text = a.judge;
  if (!a.config.empty()) {
    text = read_file(a.config);
  } else if (!text.empty() && text.front() != '{') {
    text = read_file(text);
  }
  if (text.empty()) throw Error(ErrorCode::kInvalidArgument, "rejudge needs --judge or --config");
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kParse, "judge spec is not valid JSON");
  if (j.contains("judge") && j.at("judge").is_object()) return j.at("judge");
  return j;
}

int cmd_rejudge(const RejudgeArgs& a, std::ostream& out) {
  TrajectoryStore store(a.store);
  if (!store.has_run(a.run_id)) {
    throw Error(ErrorCode::kNotFound, "run '" + a.run_id + "' not found in " + a.store);
  }
  auto judge = make_judge(read_judge_spec(a));
  std::string corpus_dir = a.corpus;
  if (corpus_dir.empty()) {
    auto m = RunRecords(store).load_run_manifest(a.run_id);
    corpus_dir = m.config.value("corpus", "");
  }
  if (corpus_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot locate the run's corpus");
  Corpus corpus = load_corpus(corpus_dir);
  VerdictSet set = rejudge_run(a.run_id, *judge, corpus, store);
  std::size_t done = std::count_if(set.verdicts.begin(), set.verdicts.end(), [](const auto& kv) {
    return !kv.second.is_error() && kv.second.done;
  });
  out << "evaluator: " << set.evaluator_id << '\n'
      << "verdicts: " << set.verdicts.size() << '\n'
      << "done: " << done << '\n';
  return kExitOk;
}

int cmd_metrics(const MetricsArgs& a, std::ostream& out) {
  TrajectoryStore store(a.store);
  ReportOptions options;
  options.truth = truth_source_from_string(a.truth);
  options.task_weighted = a.task_weighted;
  fs::path labels = labels_path_for(a.store, a.labels);
  if (options.truth == TruthSource::kHuman) {
    if (!fs::exists(labels)) {
      throw Error(ErrorCode::kNotFound, "truth source human needs labels at " + labels.string());
    }
  }
  options.human = adjudicate_labels(read_labels_file(labels));
  std::vector<RunData> runs;
  for (const auto& id : a.run_ids) {
    if (!store.has_run(id)) throw Error(ErrorCode::kNotFound, "run '" + id + "' not found");
    runs.push_back(RunData::load(store, id));
  }
  MetricsReport report = build_report(runs, options);
  for (const auto& p : emit_report(report, a.out)) out << "wrote " << p.string() << '\n';
  out << '\n' << render_accuracy_table(report) << '\n' << render_success_csv(report);
  return kExitOk;
}

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  auto [host, port] = parse_bind_address(a.bind);
  auto api = std::make_shared<ReviewApi>(
      a.store, a.labels.empty() ? std::nullopt : std::optional<fs::path>(a.labels));
  ReviewServer server(api, a.ui.empty() ? std::nullopt : std::optional<fs::path>(a.ui));
  server.bind(host, port);

  sigset_t set, old;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, &old);
  server.start();
  out << "serving " << a.store << " on http://" << host << ':' << server.port() << '\n' << std::flush;
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  pthread_sigmask(SIG_SETMASK, &old, nullptr);
  out << "stopped\n";
  return kExitOk;
}

int cmd_export_labels(const ExportArgs& a, std::ostream& out) {
  auto labels = read_labels_file(labels_path_for(a.store, a.labels));
  if (!a.all) labels = latest_labels(labels);
  std::string text;
  for (const auto& l : labels) text += to_json(l).dump() + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    write_file_atomic(a.out, text);
    out << "wrote " << labels.size() << " labels to " << a.out << '\n';
  }
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evaluation and feedback harness for computer-use agents", "cuaeval"};
  app.require_subcommand(1);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Validate a task corpus against a profile");
  validate->add_option("corpus", va.corpus, "Corpus directory")->required();
  validate->add_option("--profile", va.profile, "full or unconstrained")->capture_default_str();
  validate->add_option("--out", va.out, "Where to write the JSON report")->capture_default_str();
  validate->add_option("--sim-apps", va.sim_apps, "Also check predicates against these app definitions");
  validate->add_flag("--strict", va.strict, "Reject unknown fields");

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Run a benchmark from a config file");
  run->add_option("--config", ra.config, "Run config JSON")->required();
  run->add_option("--store", ra.store, "Override the store root");
  run->add_option("--sim-apps", ra.sim_apps, "Override the sim app directory");
  run->add_option("--run-id", ra.run_id, "Explicit run id");
  run->add_option("--parallelism", ra.parallelism, "Concurrent episodes");
  run->add_option("--seed", ra.seed, "Task sampling seed");

  RejudgeArgs rj;
  auto* rejudge = app.add_subcommand("rejudge", "Judge a stored run again with another evaluator");
  rejudge->add_option("run_id", rj.run_id, "Run to re-judge")->required();
  rejudge->add_option("--judge", rj.judge, "Judge spec as JSON or a path to one");
  rejudge->add_option("--config", rj.config, "File with a judge spec or a run config");
  rejudge->add_option("--store", rj.store, "Store root")->capture_default_str();
  rejudge->add_option("--corpus", rj.corpus, "Corpus directory (defaults to the run's)");

  MetricsArgs ma;
  auto* metrics = app.add_subcommand("metrics", "Compute accuracy and success-rate reports");
  metrics->add_option("run_ids", ma.run_ids, "Runs to include (one per agent)")->required();
  metrics->add_option("--truth", ma.truth, "oracle, human or judge")->capture_default_str();
  metrics->add_option("--out", ma.out, "Output directory")->capture_default_str();
  metrics->add_option("--store", ma.store, "Store root")->capture_default_str();
  metrics->add_option("--labels", ma.labels, "Label file (defaults to <store>/labels.jsonl)");
  metrics->add_flag("--task-weighted", ma.task_weighted, "Weight averages by task count");

  ServeArgs sa;
  auto* serve = app.add_subcommand("serve", "Serve the review API and UI assets");
  serve->add_option("--store", sa.store, "Store root")->capture_default_str();
  serve->add_option("--bind", sa.bind, "host:port")->capture_default_str();
  serve->add_option("--ui", sa.ui, "Directory of static UI assets");
  serve->add_option("--labels", sa.labels, "Label file (defaults to <store>/labels.jsonl)");

  ExportArgs ea;
  auto* export_labels = app.add_subcommand("export-labels", "Print stored human labels as JSONL");
  export_labels->add_option("--store", ea.store, "Store root")->capture_default_str();
  export_labels->add_option("--labels", ea.labels, "Label file (defaults to <store>/labels.jsonl)");
  export_labels->add_option("--out", ea.out, "Write to a file instead of stdout");
  export_labels->add_flag("--all", ea.all, "Keep superseded labels too");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(va, out, err);
    if (*run) return cmd_run(ra, out);
    if (*rejudge) return cmd_rejudge(rj, out);
    if (*metrics) return cmd_metrics(ma, out);
    if (*serve) return cmd_serve(sa, out);
    if (*export_labels) return cmd_export_labels(ea, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace cuaeval
