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

// Benchmark runs over the sample corpus for tests that need a populated store.

#pragma once

#include <string>

#include "cuaeval/feedback_loop.hpp"
#include "cuaeval/run_config.hpp"
#include "test_support.hpp"

namespace cuaeval::testing {

inline RunConfig sample_config(const std::string& config_name, const std::filesystem::path& store,
                               const std::string& run_id, int parallelism = 1) {
  RunConfig c = load_run_config(fixture("configs/" + config_name + ".json"));
  c.store_root = store;
  c.run_id = run_id;
  c.parallelism = parallelism;
  return c;
}

inline BenchmarkResult run_sample(const std::string& config_name, const std::filesystem::path& store,
                                  const std::string& run_id, int parallelism = 1) {
  PreparedRun run = prepare_run(sample_config(config_name, store, run_id, parallelism));
  TrajectoryStore s(store);
  return execute_run(run, s);
}

}  // namespace cuaeval::testing
