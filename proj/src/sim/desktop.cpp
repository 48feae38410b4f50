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

#include "cuaeval/sim/desktop.hpp"

#include <nlohmann/json.hpp>

#include "cuaeval/error.hpp"

namespace cuaeval::sim {

using nlohmann::json;

std::string to_sidecar(const SimDesktopState& state) {
  json j{{"focused_app", state.focused_app},
         {"app_states", state.app_states},
         {"screen", {{"width", state.screen.width}, {"height", state.screen.height}}}};
  return j.dump();
}

SimDesktopState from_sidecar(std::string_view sidecar) {
  try {
    json j = json::parse(sidecar);
    SimDesktopState s;
    s.focused_app = j.at("focused_app").get<std::string>();
    s.app_states = j.at("app_states").get<std::map<std::string, FieldAssignment>>();
    s.screen.width = j.at("screen").at("width").get<int>();
    s.screen.height = j.at("screen").at("height").get<int>();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed state sidecar: ") + e.what());
  }
}

SimDesktopState reset(const TaskSpec& task, const AppRegistry& apps) {
  if (!apps.contains(task.app_id)) {
    throw Error(ErrorCode::kNotFound, "task '" + task.task_id +
                                          "' needs sim app '" + task.app_id +
                                          "', which is not defined");
  }
  SimDesktopState s;
  s.screen = apps.screen;
  s.focused_app = task.app_id;
  for (const auto& [id, def] : apps.apps) s.app_states[id] = def.initial_state;
  return s;
}

namespace {

bool when_holds(const Transition& t, const FieldAssignment& current) {
  for (const auto& [field, value] : t.when) {
    auto it = current.find(field);
    if (it == current.end() || it->second != value) return false;
  }
  return true;
}

bool trigger_matches(const Trigger& trig, const ActionRecord& action, const SimAppDef& def) {
  if (const auto* c = std::get_if<Click>(&action)) {
    if (trig.kind != Trigger::Kind::kClick) return false;
    const Region* r = def.find_region(trig.region);
    return r && r->contains(c->x, c->y);
  }
  if (const auto* c = std::get_if<DoubleClick>(&action)) {
    if (trig.kind != Trigger::Kind::kDoubleClick) return false;
    const Region* r = def.find_region(trig.region);
    return r && r->contains(c->x, c->y);
  }
  if (const auto* t = std::get_if<TypeText>(&action)) {
    return trig.kind == Trigger::Kind::kTypeText &&
           (trig.pattern == "*" || trig.pattern == t->text);
  }
  if (const auto* k = std::get_if<KeyPress>(&action)) {
    return trig.kind == Trigger::Kind::kKeyPress && trig.keys == key_combo(k->keys);
  }
  return false;
}

}  // namespace

SimDesktopState apply_action(const SimDesktopState& state, const ActionRecord& action,
                             const AppRegistry& apps) {
  int px = 0;
  int py = 0;
  bool pointer = false;
  if (const auto* c = std::get_if<Click>(&action)) {
    px = c->x;
    py = c->y;
    pointer = true;
  } else if (const auto* d = std::get_if<DoubleClick>(&action)) {
    px = d->x;
    py = d->y;
    pointer = true;
  }
  if (pointer && !state.screen.contains(px, py)) {
    throw Error(ErrorCode::kInvalidArgument,
                "coordinates (" + std::to_string(px) + ", " + std::to_string(py) +
                    ") outside the screen");
  }
  if (std::holds_alternative<Wait>(action)) return state;

  if (pointer) {
    if (auto app = apps.dock_hit(px, py)) {
      SimDesktopState next = state;
      next.focused_app = *app;
      return next;
    }
  }

  const SimAppDef& def = apps.at(state.focused_app);
  const FieldAssignment& current = state.app_states.at(state.focused_app);
  for (const auto& t : def.transitions) {
    if (!trigger_matches(t.trigger, action, def) || !when_holds(t, current)) continue;
    SimDesktopState next = state;
    FieldAssignment& fields = next.app_states[state.focused_app];
    for (const auto& [field, value] : t.set) {
      if (value == kTypedTextToken) {
        fields[field] = std::get<TypeText>(action).text;
      } else {
        fields[field] = value;
      }
    }
    if (t.focus) next.focused_app = *t.focus;
    return next;
  }
  return state;
}

void validate_state(const SimDesktopState& state, const AppRegistry& apps) {
  if (!state.app_states.count(state.focused_app)) {
    throw Error(ErrorCode::kInvalidArgument,
                "focused app '" + state.focused_app + "' has no state");
  }
  for (const auto& [id, fields] : state.app_states) {
    const SimAppDef& def = apps.at(id);
    for (const auto& [name, f] : def.state_fields) {
      auto it = fields.find(name);
      if (it == fields.end() || !f.accepts(it->second)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "illegal or missing value for '" + id + "." + name + "'");
      }
    }
    if (fields.size() != def.state_fields.size()) {
      throw Error(ErrorCode::kInvalidArgument, "app '" + id + "' has undeclared fields");
    }
  }
}

}  // namespace cuaeval::sim
