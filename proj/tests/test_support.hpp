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

// Shared helpers for the unit and acceptance tests.

#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "cuaeval/corpus.hpp"
#include "cuaeval/sim/app_def.hpp"
#include "cuaeval/util.hpp"

namespace cuaeval::testing {

inline std::filesystem::path source_dir() { return CUAEVAL_SOURCE_DIR; }
inline std::filesystem::path sample_corpus_dir() { return source_dir() / "data" / "sample_corpus"; }
inline std::filesystem::path sim_apps_dir() { return source_dir() / "data" / "sim_apps"; }
inline std::filesystem::path fixture(const std::string& rel) { return source_dir() / "fixtures" / rel; }

// Removed with its contents on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("cuaeval-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline const Corpus& sample_corpus() {
  static const Corpus c = load_corpus(sample_corpus_dir());
  return c;
}

inline std::shared_ptr<const sim::AppRegistry> sample_apps() {
  static const auto apps =
      std::make_shared<const sim::AppRegistry>(sim::load_app_defs(sim_apps_dir()));
  return apps;
}

inline const TaskSpec& sample_task(const std::string& id) {
  const TaskSpec* t = sample_corpus().find_task(id);
  if (!t) throw std::runtime_error("no sample task " + id);
  return *t;
}

// One app per entry of `tasks_per_app`, each with that many tasks.
inline Corpus synthetic_corpus(const std::vector<int>& tasks_per_app) {
  Corpus c;
  for (std::size_t a = 0; a < tasks_per_app.size(); ++a) {
    std::string app = "app" + std::to_string(a);
    c.apps.push_back({app, "App " + std::to_string(a), "generated"});
    for (int t = 0; t < tasks_per_app[a]; ++t) {
      TaskSpec task;
      task.task_id = app + "-task" + std::to_string(t);
      task.app_id = app;
      task.description = "Task " + std::to_string(t) + " in " + app;
      c.tasks.push_back(std::move(task));
    }
  }
  return c;
}

}  // namespace cuaeval::testing
