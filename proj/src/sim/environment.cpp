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

#include "cuaeval/sim/environment.hpp"

#include "cuaeval/sim/desktop.hpp"
#include "cuaeval/sim/render.hpp"

namespace cuaeval {

SimEnvironment::SimEnvironment(std::shared_ptr<const sim::AppRegistry> apps)
    : apps_(std::move(apps)) {}

Screenshot SimEnvironment::reset(const TaskSpec& task) {
  state_ = sim::reset(task, *apps_);
  return capture();
}

Screenshot SimEnvironment::apply(const ActionRecord& action) {
  state_ = sim::apply_action(state_, action, *apps_);
  return capture();
}

Screenshot SimEnvironment::capture() const { return sim::render(state_, *apps_); }

EnvironmentFactory sim_environment_factory(std::shared_ptr<const sim::AppRegistry> apps) {
  return [apps = std::move(apps)]() -> std::unique_ptr<Environment> {
    return std::make_unique<SimEnvironment>(apps);
  };
}

}  // namespace cuaeval
