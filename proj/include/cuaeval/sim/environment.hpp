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

#include <functional>
#include <memory>

#include "cuaeval/action.hpp"
#include "cuaeval/corpus.hpp"
#include "cuaeval/sim/app_def.hpp"
#include "cuaeval/sim/state.hpp"

namespace cuaeval {

// A desktop an agent acts on. One instance belongs to one episode; its state
// carries over between attempts (retries never reset it).
//
// Only the simulated desktop is implemented. A real-OS adapter would
// implement this interface by driving the machine and capturing the screen.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual ScreenBounds bounds() const = 0;
  virtual Screenshot reset(const TaskSpec& task) = 0;
  /// Throws kInvalidArgument for actions outside the screen.
  virtual Screenshot apply(const ActionRecord& action) = 0;
  virtual Screenshot capture() const = 0;
};

using EnvironmentFactory = std::function<std::unique_ptr<Environment>()>;

class SimEnvironment final : public Environment {
 public:
  explicit SimEnvironment(std::shared_ptr<const sim::AppRegistry> apps);

  ScreenBounds bounds() const override { return apps_->screen; }
  Screenshot reset(const TaskSpec& task) override;
  Screenshot apply(const ActionRecord& action) override;
  Screenshot capture() const override;

  const sim::SimDesktopState& state() const { return state_; }
  const sim::AppRegistry& apps() const { return *apps_; }

 private:
  std::shared_ptr<const sim::AppRegistry> apps_;
  sim::SimDesktopState state_;
};

EnvironmentFactory sim_environment_factory(std::shared_ptr<const sim::AppRegistry> apps);

}  // namespace cuaeval
