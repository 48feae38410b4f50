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

#include "cuaeval/sim/app_def.hpp"

#include <algorithm>
#include <set>

#include "cuaeval/error.hpp"
#include "cuaeval/util.hpp"

namespace cuaeval::sim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kDockMargin = 16;
constexpr int kDockSlotWidth = 96;
constexpr int kDockSlotGap = 8;

[[noreturn]] void invalid(const std::string& app, const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, "sim app '" + app + "': " + what);
}

const char* trigger_name(Trigger::Kind k) {
  switch (k) {
    case Trigger::Kind::kClick: return "click";
    case Trigger::Kind::kDoubleClick: return "double_click";
    case Trigger::Kind::kTypeText: return "type_text";
    case Trigger::Kind::kKeyPress: return "key_press";
  }
  return "click";
}

FieldAssignment assignment_from_json(const json& j, const std::string& app,
                                     const char* what) {
  FieldAssignment out;
  if (j.is_null()) return out;
  if (!j.is_object()) invalid(app, std::string(what) + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_string()) {
      invalid(app, std::string(what) + "." + it.key() + " must be a string");
    }
    out[it.key()] = it.value().get<std::string>();
  }
  return out;
}

Trigger trigger_from_json(const json& j, const std::string& app) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    invalid(app, "trigger needs a string 'type'");
  }
  Trigger t;
  auto type = j.at("type").get<std::string>();
  if (type == "click" || type == "double_click") {
    t.kind = type == "click" ? Trigger::Kind::kClick : Trigger::Kind::kDoubleClick;
    t.region = j.value("region", "");
  } else if (type == "type_text") {
    t.kind = Trigger::Kind::kTypeText;
    t.pattern = j.value("pattern", "*");
  } else if (type == "key_press") {
    t.kind = Trigger::Kind::kKeyPress;
    const auto& k = j.contains("keys") ? j.at("keys") : json();
    if (k.is_string()) {
      t.keys = key_combo({k.get<std::string>()});
    } else if (k.is_array()) {
      t.keys = key_combo(k.get<std::vector<std::string>>());
    } else {
      invalid(app, "key_press trigger needs 'keys'");
    }
  } else {
    invalid(app, "unknown trigger type '" + type + "'");
  }
  return t;
}

json trigger_to_json(const Trigger& t) {
  json j{{"type", trigger_name(t.kind)}};
  switch (t.kind) {
    case Trigger::Kind::kClick:
    case Trigger::Kind::kDoubleClick: j["region"] = t.region; break;
    case Trigger::Kind::kTypeText: j["pattern"] = t.pattern; break;
    case Trigger::Kind::kKeyPress: j["keys"] = t.keys; break;
  }
  return j;
}

void validate_def(const SimAppDef& d, const ScreenBounds& screen) {
  if (!is_slug(d.app_id)) invalid(d.app_id, "app_id must match [a-z0-9_-]+");
  if (d.state_fields.empty()) invalid(d.app_id, "declares no state fields");
  for (const auto& [name, f] : d.state_fields) {
    if (!f.is_text && f.values.empty()) {
      invalid(d.app_id, "field '" + name + "' has no values");
    }
    std::set<std::string> uniq(f.values.begin(), f.values.end());
    if (uniq.size() != f.values.size()) {
      invalid(d.app_id, "field '" + name + "' repeats a value");
    }
  }
  for (const auto& [name, f] : d.state_fields) {
    auto it = d.initial_state.find(name);
    if (it == d.initial_state.end()) {
      invalid(d.app_id, "initial_state does not assign '" + name + "'");
    }
    if (!f.accepts(it->second)) {
      invalid(d.app_id, "initial value '" + it->second + "' is not legal for '" + name + "'");
    }
  }
  for (const auto& [name, _] : d.initial_state) {
    if (!d.state_fields.count(name)) {
      invalid(d.app_id, "initial_state assigns undeclared field '" + name + "'");
    }
  }
  std::set<std::string> names;
  const int content_height = screen.height - kDockHeight;
  for (const auto& r : d.regions) {
    if (r.name.empty()) invalid(d.app_id, "region with empty name");
    if (!names.insert(r.name).second) invalid(d.app_id, "duplicate region '" + r.name + "'");
    if (r.x < 0 || r.y < 0 || r.w <= 0 || r.h <= 0 || r.x + r.w > screen.width ||
        r.y + r.h > content_height) {
      invalid(d.app_id, "region '" + r.name + "' lies outside the " +
                            std::to_string(screen.width) + "x" +
                            std::to_string(content_height) + " content area");
    }
  }
  for (std::size_t i = 0; i < d.transitions.size(); ++i) {
    const auto& t = d.transitions[i];
    std::string where = "transition " + std::to_string(i);
    bool pointer = t.trigger.kind == Trigger::Kind::kClick ||
                   t.trigger.kind == Trigger::Kind::kDoubleClick;
    if (pointer && !d.find_region(t.trigger.region)) {
      invalid(d.app_id, where + " references undeclared region '" + t.trigger.region + "'");
    }
    if (t.trigger.kind == Trigger::Kind::kKeyPress && t.trigger.keys.empty()) {
      invalid(d.app_id, where + " has an empty key combo");
    }
    for (const auto& [field, value] : t.when) {
      auto f = d.state_fields.find(field);
      if (f == d.state_fields.end()) {
        invalid(d.app_id, where + " tests undeclared field '" + field + "'");
      }
      if (!f->second.accepts(value)) {
        invalid(d.app_id, where + " tests illegal value '" + value + "'");
      }
    }
    for (const auto& [field, value] : t.set) {
      auto f = d.state_fields.find(field);
      if (f == d.state_fields.end()) {
        invalid(d.app_id, where + " sets undeclared field '" + field + "'");
      }
      if (value == kTypedTextToken) {
        if (t.trigger.kind != Trigger::Kind::kTypeText || !f->second.is_text) {
          invalid(d.app_id, where + ": $text only applies to text fields on type_text");
        }
      } else if (!f->second.accepts(value)) {
        invalid(d.app_id, where + " sets illegal value '" + value + "'");
      }
    }
  }
}

}  // namespace

bool FieldDef::accepts(const std::string& value) const {
  if (is_text) return true;
  return std::find(values.begin(), values.end(), value) != values.end();
}

const Region* SimAppDef::find_region(const std::string& name) const {
  for (const auto& r : regions) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const SimAppDef& AppRegistry::at(const std::string& app_id) const {
  auto it = apps.find(app_id);
  if (it == apps.end()) {
    throw Error(ErrorCode::kNotFound, "no sim app definition for '" + app_id + "'");
  }
  return it->second;
}

std::vector<DockSlot> AppRegistry::dock_slots() const {
  std::vector<DockSlot> out;
  int x = kDockMargin;
  for (const auto& [id, _] : apps) {
    out.push_back({id, x, screen.height - kDockHeight + 4, kDockSlotWidth, kDockHeight - 8});
    x += kDockSlotWidth + kDockSlotGap;
  }
  return out;
}

std::optional<std::string> AppRegistry::dock_hit(int x, int y) const {
  for (const auto& s : dock_slots()) {
    if (x >= s.x && y >= s.y && x < s.x + s.w && y < s.y + s.h) return s.app_id;
  }
  return std::nullopt;
}

SimAppDef app_def_from_json(const json& j, const ScreenBounds& screen) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "sim app definition must be an object");
  SimAppDef d;
  try {
    d.app_id = j.at("app_id").get<std::string>();
    d.display_name = j.value("display_name", d.app_id);
    for (auto it = j.at("state_fields").begin(); it != j.at("state_fields").end(); ++it) {
      FieldDef f;
      if (it.value().is_string() && it.value().get<std::string>() == "text") {
        f.is_text = true;
      } else if (it.value().is_array()) {
        f.values = it.value().get<std::vector<std::string>>();
      } else {
        invalid(d.app_id, "field '" + it.key() + "' must be \"text\" or an array of values");
      }
      d.state_fields[it.key()] = std::move(f);
    }
    d.initial_state = assignment_from_json(j.at("initial_state"), d.app_id, "initial_state");
    if (j.contains("regions")) {
      for (const auto& r : j.at("regions")) {
        d.regions.push_back({r.at("name").get<std::string>(), r.at("x").get<int>(),
                             r.at("y").get<int>(), r.at("w").get<int>(),
                             r.at("h").get<int>()});
      }
    }
    if (j.contains("transitions")) {
      for (const auto& t : j.at("transitions")) {
        Transition tr;
        tr.trigger = trigger_from_json(t.at("trigger"), d.app_id);
        tr.when = assignment_from_json(t.value("when", json()), d.app_id, "when");
        tr.set = assignment_from_json(t.value("set", json()), d.app_id, "set");
        if (t.contains("focus") && !t.at("focus").is_null()) {
          tr.focus = t.at("focus").get<std::string>();
        }
        d.transitions.push_back(std::move(tr));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, "sim app '" + d.app_id + "': " + e.what());
  }
  validate_def(d, screen);
  return d;
}

json to_json(const SimAppDef& d) {
  json fields = json::object();
  for (const auto& [name, f] : d.state_fields) {
    fields[name] = f.is_text ? json("text") : json(f.values);
  }
  json regions = json::array();
  for (const auto& r : d.regions) {
    regions.push_back({{"name", r.name}, {"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}});
  }
  json transitions = json::array();
  for (const auto& t : d.transitions) {
    json jt{{"trigger", trigger_to_json(t.trigger)}};
    if (!t.when.empty()) jt["when"] = t.when;
    if (!t.set.empty()) jt["set"] = t.set;
    if (t.focus) jt["focus"] = *t.focus;
    transitions.push_back(std::move(jt));
  }
  return json{{"app_id", d.app_id},
              {"display_name", d.display_name},
              {"state_fields", fields},
              {"initial_state", d.initial_state},
              {"regions", regions},
              {"transitions", transitions}};
}

void validate_registry(const AppRegistry& registry) {
  if (registry.screen.width <= 0 || registry.screen.height <= kDockHeight) {
    throw Error(ErrorCode::kInvalidArgument, "screen too small");
  }
  for (const auto& [id, def] : registry.apps) {
    if (id != def.app_id) {
      throw Error(ErrorCode::kInvalidArgument, "registry key '" + id + "' != app_id");
    }
    validate_def(def, registry.screen);
    for (const auto& t : def.transitions) {
      if (t.focus && !registry.contains(*t.focus)) {
        invalid(id, "transition focuses unknown app '" + *t.focus + "'");
      }
    }
  }
  auto slots = registry.dock_slots();
  if (!slots.empty() && slots.back().x + slots.back().w > registry.screen.width) {
    throw Error(ErrorCode::kInvalidArgument, "too many apps to fit in the dock");
  }
}

AppRegistry load_app_defs(const fs::path& dir, const ScreenBounds& screen) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kNotFound, "sim app directory not found: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  AppRegistry reg;
  reg.screen = screen;
  for (const auto& f : files) {
    json j;
    try {
      j = json::parse(read_file(f));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse, f.filename().string() + ": " + e.what());
    }
    SimAppDef d = app_def_from_json(j, screen);
    if (reg.apps.count(d.app_id)) {
      throw Error(ErrorCode::kAlreadyExists, "duplicate sim app '" + d.app_id + "'");
    }
    reg.apps.emplace(d.app_id, std::move(d));
  }
  validate_registry(reg);
  return reg;
}

}  // namespace cuaeval::sim
