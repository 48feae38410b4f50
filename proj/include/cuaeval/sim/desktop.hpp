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

#include "cuaeval/action.hpp"
#include "cuaeval/corpus.hpp"
#include "cuaeval/sim/app_def.hpp"
#include "cuaeval/sim/state.hpp"

namespace cuaeval::sim {

/// All apps at their initial state with the task's app focused. Throws
/// kNotFound if the task's app has no definition.
SimDesktopState reset(const TaskSpec& task, const AppRegistry& apps);

/// Pure transition function.
///
/// Clicks in the dock focus the slot's app. Otherwise click/double_click
/// hit-test the focused app's regions and type_text/key_press match text and
/// key triggers; the first rule (declaration order) whose trigger and `when`
/// match fires. Wait and unmatched actions return the state unchanged.
/// Throws kInvalidArgument only for out-of-bounds coordinates.
SimDesktopState apply_action(const SimDesktopState& state, const ActionRecord& action,
                             const AppRegistry& apps);

/// Throws kInvalidArgument if `state` violates its app definitions.
void validate_state(const SimDesktopState& state, const AppRegistry& apps);

}  // namespace cuaeval::sim
