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

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuaeval/util.hpp"

namespace cuaeval {

struct ScreenBounds {
  int width = 1280;
  int height = 800;

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  bool operator==(const ScreenBounds&) const = default;
};

// The agent action space: clicks, double-clicks, typed text, key presses and
// waits. Nothing else (no scroll, no drag).
struct Click {
  int x = 0;
  int y = 0;
  bool operator==(const Click&) const = default;
};
struct DoubleClick {
  int x = 0;
  int y = 0;
  bool operator==(const DoubleClick&) const = default;
};
struct TypeText {
  std::string text;
  bool operator==(const TypeText&) const = default;
};
struct KeyPress {
  std::vector<std::string> keys;
  bool operator==(const KeyPress&) const = default;
};
struct Wait {
  std::int64_t millis = 0;
  bool operator==(const Wait&) const = default;
};

using ActionRecord = std::variant<Click, DoubleClick, TypeText, KeyPress, Wait>;

/// Throws kInvalidArgument on coordinates outside `bounds`, a non-positive
/// wait, or an empty key list.
void validate_action(const ActionRecord& action, const ScreenBounds& bounds);

/// "cmd+shift+s": lowercased key names joined by '+'.
std::string key_combo(const std::vector<std::string>& keys);

/// One-line human summary, e.g. `click (120, 44)`.
std::string describe(const ActionRecord& action);

nlohmann::json action_to_json(const ActionRecord& action);
/// Throws kParse on unknown `type` or missing fields.
ActionRecord action_from_json(const nlohmann::json& j);

// A captured frame. PNG bytes always; the state sidecar is present for
// simulated desktops and is the authoritative description of what is shown.
struct Screenshot {
  Bytes png;
  std::optional<std::string> state_sidecar;
  int width = 0;
  int height = 0;
};

}  // namespace cuaeval
