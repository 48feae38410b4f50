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

#include <gtest/gtest.h>

#include <fstream>

#include "cuaeval/error.hpp"
#include "cuaeval/sim/environment.hpp"
#include "cuaeval/trajectory_store.hpp"
#include "test_support.hpp"

namespace cuaeval {
namespace {

using testing::TempDir;

struct Recorded {
  Trajectory trajectory;
  std::filesystem::path dir;
};

// Records a short trajectory against the settings app.
Recorded record(TrajectoryStore& store, const std::string& run_id, int attempt, int steps) {
  SimEnvironment env(testing::sample_apps());
  Screenshot shot = env.reset(testing::sample_task("settings-wifi-off"));
  auto h = store.begin_trajectory(run_id, "settings-wifi-off", "agent-a", attempt);
  if (attempt == 0) h.set_initial_screenshot(shot);
  for (int i = 0; i < steps; ++i) {
    ActionRecord a = i % 2 ? ActionRecord(Click{120, 100}) : ActionRecord(TypeText{"x" + std::to_string(i)});
    shot = env.apply(a);
    h.append_step(a, "step " + std::to_string(i), shot);
  }
  Recorded r{h.finalize(env.capture(), TrajectoryStatus::kCompletedDeclaration, "all set"),
             h.directory()};
  return r;
}

TEST(TrajectoryIds, MakeAndParse) {
  EXPECT_EQ(make_trajectory_id("run.1", "task-a", 2), "run.1.task-a.2");
  EXPECT_EQ(make_episode_id("r", "t"), "r.t");
  auto k = parse_trajectory_id("run.1.task-a.2");
  EXPECT_EQ(k.run_id, "run.1");
  EXPECT_EQ(k.task_id, "task-a");
  EXPECT_EQ(k.attempt_index, 2);
  for (const char* bad : {"", "a.b", "r.t.x", "r.t.-1", ".t.0", "r.T.0", "r/x.t.0"}) {
    EXPECT_THROW(parse_trajectory_id(bad), Error) << bad;
  }
}

TEST(TrajectoryStatus, Strings) {
  for (auto s : {TrajectoryStatus::kCompletedDeclaration, TrajectoryStatus::kBudgetExhausted,
                 TrajectoryStatus::kAgentError}) {
    EXPECT_EQ(trajectory_status_from_string(to_string(s)), s);
  }
  EXPECT_THROW(trajectory_status_from_string("crashed"), Error);
}

TEST(TrajectoryStore, RunsAreCreatedOnce) {
  TempDir dir;
  TrajectoryStore store(dir.path());
  store.create_run("r1");
  EXPECT_TRUE(store.has_run("r1"));
  EXPECT_THROW(store.create_run("r1"), Error);
  EXPECT_THROW(store.create_run("../escape"), Error);
  store.create_run("r0");
  EXPECT_EQ(store.list_runs(), (std::vector<std::string>{"r0", "r1"}));
  EXPECT_THROW(store.begin_trajectory("nope", "t", "a", 0), Error);
}

TEST(TrajectoryStore, RoundTripEquality) {
  TempDir dir;
  TrajectoryStore store(dir.path());
  store.create_run("r1");
  auto rec = record(store, "r1", 0, 3);
  Trajectory loaded = store.load_trajectory("r1", "settings-wifi-off", 0);
  EXPECT_EQ(loaded, rec.trajectory);
  EXPECT_EQ(loaded.steps.size(), 3u);
  ASSERT_TRUE(loaded.initial_screenshot.has_value());
  EXPECT_EQ(loaded.final_reasoning, "all set");
  EXPECT_EQ(trajectory_from_json(to_json(loaded)), loaded);
  EXPECT_TRUE(std::filesystem::exists(rec.dir / "screenshots" / "step-2.png"));
  EXPECT_TRUE(std::filesystem::exists(rec.dir / "screenshots" / "final.state.json"));

  auto rec1 = record(store, "r1", 1, 1);
  EXPECT_FALSE(rec1.trajectory.initial_screenshot.has_value());
  EXPECT_EQ(store.list_attempts("r1", "settings-wifi-off"), (std::vector<int>{0, 1}));
  EXPECT_EQ(store.list_episode_tasks("r1"), (std::vector<std::string>{"settings-wifi-off"}));

  Screenshot final_shot = store.read_screenshot("r1", "settings-wifi-off", 0,
                                                loaded.final_screenshot);
  EXPECT_EQ(sha256_hex(final_shot.png), loaded.final_screenshot.content_hash);
  ASSERT_TRUE(final_shot.state_sidecar.has_value());
}

TEST(TrajectoryStore, FinalizedAttemptsAreImmutable) {
  TempDir dir;
  TrajectoryStore store(dir.path());
  store.create_run("r1");
  record(store, "r1", 0, 1);
  try {
    store.begin_trajectory("r1", "settings-wifi-off", "agent-a", 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAlreadyExists);
  }
}

TEST(TrajectoryStore, HandleLifecycle) {
  TempDir dir;
  TrajectoryStore store(dir.path());
  store.create_run("r1");
  SimEnvironment env(testing::sample_apps());
  Screenshot shot = env.reset(testing::sample_task("settings-wifi-off"));
  auto h = store.begin_trajectory("r1", "settings-wifi-off", "a", 1);
  EXPECT_THROW(h.set_initial_screenshot(shot), Error) << "initial only on attempt 0";
  EXPECT_THROW(h.append_step(Wait{1}, "", Screenshot{{1, 2, 3}, std::nullopt, 1, 1}), Error)
      << "bytes must be a PNG";
  h.finalize(shot, TrajectoryStatus::kBudgetExhausted);
  EXPECT_FALSE(h.is_open());
  EXPECT_THROW(h.finalize(shot, TrajectoryStatus::kBudgetExhausted), Error);
  EXPECT_THROW(h.append_step(Wait{1}, "", shot), Error);
}

TEST(TrajectoryStore, UnfinalizedAttemptIsNotLoadableAndIsReplaced) {
  TempDir dir;
  TrajectoryStore store(dir.path());
  store.create_run("r1");
  SimEnvironment env(testing::sample_apps());
  Screenshot shot = env.reset(testing::sample_task("settings-wifi-off"));
  {
    auto h = store.begin_trajectory("r1", "settings-wifi-off", "a", 0);
    h.append_step(Wait{1}, "", shot);
  }
  try {
    store.load_trajectory("r1", "settings-wifi-off", 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
  auto h = store.begin_trajectory("r1", "settings-wifi-off", "a", 0);
  EXPECT_TRUE(h.steps().empty());
  h.finalize(shot, TrajectoryStatus::kCompletedDeclaration);
  EXPECT_TRUE(store.load_trajectory("r1", "settings-wifi-off", 0).steps.empty());
}

void flip_byte(const std::filesystem::path& p, std::size_t offset) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(static_cast<std::streamoff>(offset));
  char c = 0;
  f.get(c);
  f.seekp(static_cast<std::streamoff>(offset));
  f.put(static_cast<char>(c ^ 0x5a));
}

// Property: flipping any one byte of any stored screenshot or sidecar is caught.
TEST(TrajectoryStore, SingleByteCorruptionIsDetected) {
  TempDir dir;
  TrajectoryStore store(dir.path());
  store.create_run("r1");
  auto rec = record(store, "r1", 0, 2);
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(rec.dir / "screenshots")) {
    files.push_back(e.path());
  }
  ASSERT_EQ(files.size(), 8u);  // initial, 2 steps, final; each with a sidecar
  std::mt19937 rng(23);
  for (int trial = 0; trial < 120; ++trial) {
    const auto& f = files[rng() % files.size()];
    std::size_t offset = rng() % std::filesystem::file_size(f);
    flip_byte(f, offset);
    try {
      store.load_trajectory("r1", "settings-wifi-off", 0);
      ADD_FAILURE() << "undetected corruption in " << f << " at " << offset;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kIntegrity);
      EXPECT_NE(std::string(e.what()).find(f.filename().string()), std::string::npos) << e.what();
    }
    flip_byte(f, offset);
    EXPECT_NO_THROW(store.load_trajectory("r1", "settings-wifi-off", 0));
  }
}

TEST(TrajectoryStore, MissingScreenshotIsIntegrityError) {
  TempDir dir;
  TrajectoryStore store(dir.path());
  store.create_run("r1");
  auto rec = record(store, "r1", 0, 1);
  std::filesystem::remove(rec.dir / "screenshots" / "step-0.png");
  try {
    store.load_trajectory("r1", "settings-wifi-off", 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIntegrity);
  }
}

}  // namespace
}  // namespace cuaeval
