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

#include <map>
#include <string>
#include <string_view>

#include "cuaeval/action.hpp"

namespace cuaeval::sim {

using FieldAssignment = std::map<std::string, std::string>;

// Immutable-by-convention value: every transition returns a fresh state.
struct SimDesktopState {
  std::string focused_app;
  std::map<std::string, FieldAssignment> app_states;
  ScreenBounds screen;

  bool operator==(const SimDesktopState&) const = default;
};

/// Canonical JSON dump (sorted keys, no whitespace). Equal states give equal
/// strings and vice versa.
std::string to_sidecar(const SimDesktopState& state);
/// Throws kParse on malformed input.
SimDesktopState from_sidecar(std::string_view sidecar);

}  // namespace cuaeval::sim
