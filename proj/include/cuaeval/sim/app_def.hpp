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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuaeval/action.hpp"
#include "cuaeval/sim/state.hpp"

namespace cuaeval::sim {

// Height of the dock strip along the bottom edge. App regions live above it.
inline constexpr int kDockHeight = 48;

struct FieldDef {
  bool is_text = false;
  std::vector<std::string> values;  // legal values when !is_text

  bool accepts(const std::string& value) const;
  bool operator==(const FieldDef&) const = default;
};

struct Region {
  std::string name;
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool contains(int px, int py) const {
    return px >= x && py >= y && px < x + w && py < y + h;
  }
  bool operator==(const Region&) const = default;
};

struct Trigger {
  enum class Kind { kClick, kDoubleClick, kTypeText, kKeyPress };
  Kind kind = Kind::kClick;
  std::string region;   // click / double_click
  std::string pattern;  // type_text: exact text, or "*" for any
  std::string keys;     // key_press: normalized combo, e.g. "cmd+q"
  bool operator==(const Trigger&) const = default;
};

// Placeholder in `set` values that is replaced by the typed text.
inline constexpr const char* kTypedTextToken = "$text";

struct Transition {
  Trigger trigger;
  FieldAssignment when;  // all must hold in the app's current state
  FieldAssignment set;
  std::optional<std::string> focus;  // switch the focused app
  bool operator==(const Transition&) const = default;
};

struct SimAppDef {
  std::string app_id;
  std::string display_name;
  std::map<std::string, FieldDef> state_fields;
  FieldAssignment initial_state;
  std::vector<Region> regions;
  std::vector<Transition> transitions;

  const Region* find_region(const std::string& name) const;
  bool operator==(const SimAppDef&) const = default;
};

struct DockSlot {
  std::string app_id;
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
};

struct AppRegistry {
  ScreenBounds screen;
  std::map<std::string, SimAppDef> apps;

  /// Throws kNotFound.
  const SimAppDef& at(const std::string& app_id) const;
  bool contains(const std::string& app_id) const { return apps.count(app_id) > 0; }

  /// Dock slots in app_id order, left to right.
  std::vector<DockSlot> dock_slots() const;
  std::optional<std::string> dock_hit(int x, int y) const;
};

/// Parses and validates one definition against `screen`. Throws kParse or
/// kInvalidArgument naming the offending item.
SimAppDef app_def_from_json(const nlohmann::json& j, const ScreenBounds& screen);
nlohmann::json to_json(const SimAppDef& def);

/// Loads every `*.json` in `dir`. Focus targets must name loaded apps.
AppRegistry load_app_defs(const std::filesystem::path& dir,
                          const ScreenBounds& screen = {});

/// Cross-checks a registry after manual construction (e.g. in tests).
void validate_registry(const AppRegistry& registry);

}  // namespace cuaeval::sim
