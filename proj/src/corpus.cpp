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

#include "cuaeval/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "cuaeval/error.hpp"
#include "cuaeval/sim/predicate.hpp"
#include "cuaeval/util.hpp"

namespace cuaeval {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Complexity c) {
  return c == Complexity::kMultiStep ? "multi_step" : "simple";
}

Complexity complexity_from_string(const std::string& s) {
  if (s == "simple") return Complexity::kSimple;
  if (s == "multi_step") return Complexity::kMultiStep;
  throw Error(ErrorCode::kInvalidArgument, "unknown complexity '" + s + "'");
}

const char* to_string(Label l) { return l == Label::kDone ? "done" : "not_done"; }

Label label_from_string(const std::string& s) {
  if (s == "done") return Label::kDone;
  if (s == "not_done") return Label::kNotDone;
  throw Error(ErrorCode::kInvalidArgument,
              "label must be 'done' or 'not_done', got '" + s + "'");
}

const AppSpec* Corpus::find_app(const std::string& app_id) const {
  for (const auto& a : apps) {
    if (a.app_id == app_id) return &a;
  }
  return nullptr;
}

const TaskSpec* Corpus::find_task(const std::string& task_id) const {
  for (const auto& t : tasks) {
    if (t.task_id == task_id) return &t;
  }
  return nullptr;
}

json to_json(const AppSpec& app) {
  return json{{"app_id", app.app_id},
              {"display_name", app.display_name},
              {"category", app.category}};
}

json to_json(const TaskSpec& task) {
  json j{{"task_id", task.task_id},
         {"app_id", task.app_id},
         {"description", task.description},
         {"complexity", to_string(task.complexity)}};
  if (task.goal_predicate) j["goal_predicate"] = *task.goal_predicate;
  return j;
}

json to_json(const HumanLabel& label) {
  return json{{"task_id", label.task_id},
              {"trajectory_id", label.trajectory_id},
              {"label", to_string(label.label)},
              {"annotator_id", label.annotator_id},
              {"labeled_at", label.labeled_at}};
}

namespace {

// Reads one JSONL file, handing each parsed object to `fn` with its line number.
template <class Fn>
void for_each_record(const fs::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "missing corpus file " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse, path.filename().string() + ":" +
                                         std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object()) {
      throw Error(ErrorCode::kParse, path.filename().string() + ":" +
                                         std::to_string(line_no) +
                                         ": record is not a JSON object");
    }
    fn(j, line_no);
  }
}

class RecordReader {
 public:
  RecordReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {}

  std::string required(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key) || !j_.at(key).is_string()) {
      throw Error(ErrorCode::kParse, where_ + ": field '" + key + "' must be a string");
    }
    return j_.at(key).get<std::string>();
  }

  std::optional<std::string> optional(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return std::nullopt;
    if (!j_.at(key).is_string()) {
      throw Error(ErrorCode::kParse, where_ + ": field '" + key + "' must be a string");
    }
    return j_.at(key).get<std::string>();
  }

  std::vector<std::string> unknown_fields() const {
    std::vector<std::string> out;
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) out.push_back(it.key());
    }
    return out;
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void check_unknown(const RecordReader& r, const LoadOptions& options,
                   std::vector<std::string>& warnings) {
  for (const auto& key : r.unknown_fields()) {
    std::string msg = r.where() + ": unknown field '" + key + "'";
    if (options.strict) throw Error(ErrorCode::kParse, msg);
    spdlog::warn("{}", msg);
    warnings.push_back(msg);
  }
}

std::string where(const char* file, int line_no) {
  return std::string(file) + ":" + std::to_string(line_no);
}

HumanLabel read_label(RecordReader& r) {
  HumanLabel label;
  label.task_id = r.required("task_id");
  label.trajectory_id = r.required("trajectory_id");
  try {
    label.label = label_from_string(r.required("label"));
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, r.where() + ": " + e.what());
  }
  label.annotator_id = r.required("annotator_id");
  label.labeled_at = r.optional("labeled_at").value_or("");
  return label;
}

}  // namespace

HumanLabel label_from_json(const json& j) {
  RecordReader r(j, "label");
  return read_label(r);
}

Corpus load_corpus(const fs::path& dir, LoadOptions options) {
  Corpus corpus;
  std::unordered_set<std::string> app_ids;
  for_each_record(dir / "apps.jsonl", [&](const json& j, int line_no) {
    RecordReader r(j, where("apps.jsonl", line_no));
    AppSpec app;
    app.app_id = r.required("app_id");
    app.display_name = r.required("display_name");
    app.category = r.optional("category").value_or("");
    check_unknown(r, options, corpus.warnings);
    if (!is_slug(app.app_id)) {
      throw Error(ErrorCode::kParse,
                  r.where() + ": app_id '" + app.app_id + "' must match [a-z0-9_-]+");
    }
    if (!app_ids.insert(app.app_id).second) {
      throw Error(ErrorCode::kAlreadyExists,
                  r.where() + ": duplicate app_id '" + app.app_id + "'");
    }
    corpus.apps.push_back(std::move(app));
  });

  std::unordered_set<std::string> task_ids;
  for_each_record(dir / "tasks.jsonl", [&](const json& j, int line_no) {
    RecordReader r(j, where("tasks.jsonl", line_no));
    TaskSpec task;
    task.task_id = r.required("task_id");
    task.app_id = r.required("app_id");
    task.description = r.required("description");
    if (auto c = r.optional("complexity")) {
      try {
        task.complexity = complexity_from_string(*c);
      } catch (const Error& e) {
        throw Error(ErrorCode::kParse, r.where() + ": " + e.what());
      }
    }
    task.goal_predicate = r.optional("goal_predicate");
    check_unknown(r, options, corpus.warnings);
    if (!is_slug(task.task_id)) {
      throw Error(ErrorCode::kParse, r.where() + ": task_id '" + task.task_id +
                                         "' must match [a-z0-9_-]+");
    }
    if (trim(task.description).empty()) {
      throw Error(ErrorCode::kParse, r.where() + ": empty description");
    }
    if (!task_ids.insert(task.task_id).second) {
      throw Error(ErrorCode::kAlreadyExists,
                  r.where() + ": duplicate task_id '" + task.task_id + "'");
    }
    if (!app_ids.count(task.app_id)) {
      throw Error(ErrorCode::kNotFound, r.where() + ": task '" + task.task_id +
                                            "' references unknown app_id '" +
                                            task.app_id + "'");
    }
    if (task.goal_predicate) {
      try {
        (void)sim::GoalPredicate::parse(*task.goal_predicate);
      } catch (const Error& e) {
        throw Error(ErrorCode::kParse, r.where() + ": goal_predicate: " + e.what());
      }
    }
    corpus.tasks.push_back(std::move(task));
  });

  if (fs::exists(dir / "labels.jsonl")) {
    for_each_record(dir / "labels.jsonl", [&](const json& j, int line_no) {
      RecordReader r(j, where("labels.jsonl", line_no));
      HumanLabel label = read_label(r);
      check_unknown(r, options, corpus.warnings);
      if (!task_ids.count(label.task_id)) {
        throw Error(ErrorCode::kNotFound, r.where() + ": label references unknown task '" +
                                              label.task_id + "'");
      }
      corpus.labels.push_back(std::move(label));
    });
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const fs::path& dir) {
  fs::create_directories(dir);
  auto dump = [](const auto& items) {
    std::string out;
    for (const auto& item : items) out += to_json(item).dump() + "\n";
    return out;
  };
  write_file_atomic(dir / "apps.jsonl", dump(corpus.apps));
  write_file_atomic(dir / "tasks.jsonl", dump(corpus.tasks));
  if (!corpus.labels.empty()) write_file_atomic(dir / "labels.jsonl", dump(corpus.labels));
}

std::string corpus_hash(const Corpus& corpus) {
  std::string canon;
  for (const auto& a : corpus.apps) canon += to_json(a).dump() + "\n";
  canon += "--\n";
  for (const auto& t : corpus.tasks) canon += to_json(t).dump() + "\n";
  return sha256_hex(canon);
}

CorpusProfile CorpusProfile::named(const std::string& name) {
  if (name == "full") return full();
  if (name == "unconstrained") return unconstrained();
  throw Error(ErrorCode::kInvalidArgument,
              "unknown profile '" + name + "' (expected full or unconstrained)");
}

json ValidationReport::to_json() const {
  json v = json::array();
  for (const auto& x : violations) {
    v.push_back({{"code", x.code}, {"subject", x.subject}, {"message", x.message}});
  }
  return json{{"passed", passed},
              {"app_count", app_count},
              {"task_count", task_count},
              {"tasks_per_app", tasks_per_app},
              {"violations", v}};
}

ValidationReport validate_corpus(const Corpus& corpus, const CorpusProfile& profile) {
  ValidationReport report;
  report.app_count = static_cast<int>(corpus.apps.size());
  report.task_count = static_cast<int>(corpus.tasks.size());
  for (const auto& a : corpus.apps) report.tasks_per_app[a.app_id] = 0;
  for (const auto& t : corpus.tasks) ++report.tasks_per_app[t.app_id];

  if (profile.expected_app_count && report.app_count != *profile.expected_app_count) {
    report.violations.push_back(
        {"app_count", "",
         "expected " + std::to_string(*profile.expected_app_count) + " apps, found " +
             std::to_string(report.app_count)});
  }
  if (profile.expected_tasks_per_app) {
    for (const auto& [app_id, n] : report.tasks_per_app) {
      if (n != *profile.expected_tasks_per_app) {
        report.violations.push_back(
            {"tasks_per_app", app_id,
             "app '" + app_id + "' has " + std::to_string(n) + " tasks, expected " +
                 std::to_string(*profile.expected_tasks_per_app)});
      }
    }
  }
  if (profile.expected_app_count && profile.expected_tasks_per_app) {
    int expected_total = *profile.expected_app_count * *profile.expected_tasks_per_app;
    if (report.task_count != expected_total) {
      report.violations.push_back(
          {"task_count", "",
           "expected " + std::to_string(expected_total) + " tasks in total, found " +
               std::to_string(report.task_count)});
    }
  }
  report.passed = report.violations.empty();
  return report;
}

bool TaskFilter::matches(const TaskSpec& task) const {
  if (!app_ids.empty() &&
      std::find(app_ids.begin(), app_ids.end(), task.app_id) == app_ids.end()) {
    return false;
  }
  if (complexity && task.complexity != *complexity) return false;
  if (!task_ids.empty() &&
      std::find(task_ids.begin(), task_ids.end(), task.task_id) == task_ids.end()) {
    return false;
  }
  return true;
}

json TaskFilter::to_json() const {
  json j{{"app_ids", app_ids}, {"task_ids", task_ids}};
  j["complexity"] = complexity ? json(to_string(*complexity)) : json(nullptr);
  return j;
}

TaskFilter TaskFilter::from_json(const json& j) {
  TaskFilter f;
  if (j.is_null()) return f;
  if (!j.is_object()) throw Error(ErrorCode::kParse, "task filter must be an object");
  if (j.contains("app_ids")) f.app_ids = j.at("app_ids").get<std::vector<std::string>>();
  if (j.contains("task_ids")) f.task_ids = j.at("task_ids").get<std::vector<std::string>>();
  if (j.contains("complexity") && !j.at("complexity").is_null()) {
    f.complexity = complexity_from_string(j.at("complexity").get<std::string>());
  }
  return f;
}

std::vector<TaskSpec> select_tasks(const Corpus& corpus, const TaskFilter& filter,
                                   std::uint64_t seed, std::optional<std::size_t> limit) {
  for (const auto& id : filter.app_ids) {
    if (!corpus.find_app(id)) {
      throw Error(ErrorCode::kInvalidArgument, "filter names unknown app '" + id + "'");
    }
  }
  for (const auto& id : filter.task_ids) {
    if (!corpus.find_task(id)) {
      throw Error(ErrorCode::kInvalidArgument, "filter names unknown task '" + id + "'");
    }
  }
  std::vector<TaskSpec> out;
  for (const auto& t : corpus.tasks) {
    if (filter.matches(t)) out.push_back(t);
  }
  if (out.empty()) {
    throw Error(ErrorCode::kFailedPrecondition, "task filter matches no tasks");
  }
  auto by_id = [](const TaskSpec& a, const TaskSpec& b) { return a.task_id < b.task_id; };
  std::sort(out.begin(), out.end(), by_id);
  if (limit && *limit < out.size()) {
    // mt19937_64's output sequence is fixed by the standard; the modulo draw
    // keeps the shuffle independent of library distribution implementations.
    std::mt19937_64 rng(seed);
    for (std::size_t i = out.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
      std::swap(out[i], out[j]);
    }
    out.resize(*limit);
    std::sort(out.begin(), out.end(), by_id);
  }
  return out;
}

std::vector<HumanLabel> latest_labels(const std::vector<HumanLabel>& labels) {
  std::map<std::pair<std::string, std::string>, std::size_t> last;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    last[{labels[i].trajectory_id, labels[i].annotator_id}] = i;
  }
  std::vector<std::size_t> idx;
  for (const auto& [_, i] : last) idx.push_back(i);
  std::sort(idx.begin(), idx.end());
  std::vector<HumanLabel> out;
  for (auto i : idx) out.push_back(labels[i]);
  return out;
}

std::vector<HumanLabel> read_labels_file(const fs::path& path) {
  std::vector<HumanLabel> out;
  if (!fs::exists(path)) return out;
  for_each_record(path, [&](const json& j, int line_no) {
    RecordReader r(j, where(path.filename().c_str(), line_no));
    out.push_back(read_label(r));
  });
  return out;
}

LabelLog::LabelLog(fs::path path) : path_(std::move(path)) {}

HumanLabel LabelLog::append(HumanLabel label) {
  std::lock_guard lock(mu_);
  label.labeled_at = now_iso8601();
  append_line(path_, to_json(label).dump());
  return label;
}

std::vector<HumanLabel> LabelLog::read_all() const {
  std::lock_guard lock(mu_);
  return read_labels_file(path_);
}

std::vector<HumanLabel> LabelLog::latest_for(const std::string& trajectory_id) const {
  std::vector<HumanLabel> mine;
  for (auto& l : read_all()) {
    if (l.trajectory_id == trajectory_id) mine.push_back(std::move(l));
  }
  return latest_labels(mine);
}

}  // namespace cuaeval
