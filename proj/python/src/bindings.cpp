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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cuaeval/cli.hpp"
#include "cuaeval/corpus.hpp"
#include "cuaeval/error.hpp"
#include "cuaeval/feedback_loop.hpp"
#include "cuaeval/judge.hpp"
#include "cuaeval/metrics.hpp"
#include "cuaeval/report.hpp"
#include "cuaeval/review_api.hpp"
#include "cuaeval/run_config.hpp"
#include "cuaeval/run_records.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace cuaeval {
namespace {

// JSON crosses the boundary as text; the Python package decodes it.
std::string validate_corpus_json(const std::string& dir, const std::string& profile,
                                 bool strict) {
  Corpus corpus = load_corpus(dir, LoadOptions{strict});
  json j = validate_corpus(corpus, CorpusProfile::named(profile)).to_json();
  j["corpus_hash"] = corpus_hash(corpus);
  return j.dump();
}

std::string run_json(const std::string& config_path, const std::string& store,
                     const std::string& run_id, int parallelism) {
  RunConfig config = load_run_config(config_path);
  if (!store.empty()) config.store_root = store;
  if (!run_id.empty()) config.run_id = run_id;
  if (parallelism > 0) config.parallelism = parallelism;
  PreparedRun prepared = prepare_run(config);
  std::filesystem::create_directories(config.store_root);
  TrajectoryStore ts(config.store_root);
  BenchmarkResult result;
  {
    py::gil_scoped_release release;
    result = execute_run(prepared, ts);
  }
  return to_json(result.manifest).dump();
}

std::size_t rejudge_json(const std::string& store, const std::string& run_id,
                         const std::string& judge_spec, const std::string& corpus_dir) {
  TrajectoryStore ts(store);
  if (!ts.has_run(run_id)) throw Error(ErrorCode::kNotFound, "run '" + run_id + "' not found");
  auto judge = make_judge(json::parse(judge_spec));
  Corpus corpus = load_corpus(corpus_dir);
  py::gil_scoped_release release;
  return rejudge_run(run_id, *judge, corpus, ts).verdicts.size();
}

std::string metrics_json(const std::string& store, const std::vector<std::string>& run_ids,
                         const std::string& truth, bool task_weighted,
                         const std::string& labels, const std::string& out_dir) {
  TrajectoryStore ts(store);
  ReportOptions options;
  options.truth = truth_source_from_string(truth);
  options.task_weighted = task_weighted;
  options.human = adjudicate_labels(
      read_labels_file(labels.empty() ? ts.root() / "labels.jsonl" : std::filesystem::path(labels)));
  std::vector<RunData> runs;
  for (const auto& id : run_ids) runs.push_back(RunData::load(ts, id));
  MetricsReport report = build_report(runs, options);
  if (!out_dir.empty()) emit_report(report, out_dir);
  return to_json(report).dump();
}

py::dict accuracy(const std::map<std::string, std::optional<bool>>& verdicts,
                  const std::map<std::string, bool>& truth) {
  std::map<std::string, Verdict> vs;
  for (const auto& [id, done] : verdicts) {
    Verdict v;
    if (done) {
      v.done = *done;
      v.parse_path = ParsePath::kStrictJson;
    } else {
      v.parse_path = ParsePath::kParseError;
    }
    vs.emplace(id, std::move(v));
  }
  AccuracyResult r = judge_accuracy(vs, truth);
  py::dict d;
  d["tp"] = r.matrix.tp;
  d["fp"] = r.matrix.fp;
  d["tn"] = r.matrix.tn;
  d["fn"] = r.matrix.fn;
  d["excluded"] = r.matrix.excluded;
  d["unmatched"] = r.unmatched;
  if (r.accuracy) {
    d["accuracy"] = py::make_tuple(r.accuracy->num(), r.accuracy->den());
  } else {
    d["accuracy"] = py::none();
  }
  return d;
}

py::tuple cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = cli_main(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace
}  // namespace cuaeval

PYBIND11_MODULE(_cuaeval, m) {
  using namespace cuaeval;
  m.doc() = "Native core of the cuaeval harness";

  static py::exception<Error> error(m, "CuaevalError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error)(
          std::string(to_string(e.code())) + ": " + e.what());
      exc.attr("code") = to_string(e.code());
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("validate_corpus", &validate_corpus_json, py::arg("corpus_dir"),
        py::arg("profile") = "unconstrained", py::arg("strict") = false);
  m.def("run", &run_json, py::arg("config_path"), py::arg("store") = "",
        py::arg("run_id") = "", py::arg("parallelism") = 0,
        "Runs a benchmark config and returns the run manifest as JSON text.");
  m.def("rejudge", &rejudge_json, py::arg("store"), py::arg("run_id"), py::arg("judge_spec"),
        py::arg("corpus_dir"), "Returns the number of verdicts written.");
  m.def("metrics", &metrics_json, py::arg("store"), py::arg("run_ids"),
        py::arg("truth") = "oracle", py::arg("task_weighted") = false, py::arg("labels") = "",
        py::arg("out_dir") = "");
  m.def("parse_verdict", [](const std::string& raw, const std::string& evaluator_id) {
    return to_json(parse_verdict(raw, evaluator_id)).dump();
  }, py::arg("raw"), py::arg("evaluator_id") = "remote");
  m.def("judge_accuracy", &accuracy, py::arg("verdicts"), py::arg("truth"),
        "verdicts maps trajectory_id to done, or None for an unusable verdict.");
  m.def("noisy_draw", &NoisyJudge::draw, py::arg("seed"), py::arg("sample_key"));
  m.def("cli", &cli, py::arg("args"), "Runs the command line in-process: (code, stdout, stderr).");

  py::class_<ReviewApi, std::shared_ptr<ReviewApi>>(m, "ReviewApi")
      .def(py::init([](const std::string& store) { return std::make_shared<ReviewApi>(store); }),
           py::arg("store"))
      .def("handle", [](const ReviewApi& api, const std::string& method, const std::string& path,
                        const std::map<std::string, std::string>& query, const std::string& body) {
        ApiResponse r = api.handle(method, path, query, body);
        return py::make_tuple(r.status, r.content_type, py::bytes(r.body));
      }, py::arg("method"), py::arg("path"), py::arg("query") = std::map<std::string, std::string>{},
         py::arg("body") = "");
}
