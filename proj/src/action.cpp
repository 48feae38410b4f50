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

#include "cuaeval/action.hpp"

#include "cuaeval/error.hpp"

namespace cuaeval {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_point(int x, int y, const ScreenBounds& bounds) {
  if (!bounds.contains(x, y)) {
    throw Error(ErrorCode::kInvalidArgument,
                "coordinates (" + std::to_string(x) + ", " + std::to_string(y) +
                    ") outside " + std::to_string(bounds.width) + "x" +
                    std::to_string(bounds.height) + " screen");
  }
}

int require_int(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw Error(ErrorCode::kParse, std::string("action field '") + key +
                                       "' must be an integer");
  }
  return j.at(key).get<int>();
}

}  // namespace

void validate_action(const ActionRecord& action, const ScreenBounds& bounds) {
  std::visit(Overloaded{
                 [&](const Click& a) { check_point(a.x, a.y, bounds); },
                 [&](const DoubleClick& a) { check_point(a.x, a.y, bounds); },
                 [](const TypeText&) {},
                 [](const KeyPress& a) {
                   if (a.keys.empty()) {
                     throw Error(ErrorCode::kInvalidArgument,
                                 "key_press needs at least one key");
                   }
                 },
                 [](const Wait& a) {
                   if (a.millis <= 0) {
                     throw Error(ErrorCode::kInvalidArgument,
                                 "wait.millis must be positive");
                   }
                 },
             },
             action);
}

std::string key_combo(const std::vector<std::string>& keys) {
  std::string out;
  for (const auto& k : keys) {
    if (!out.empty()) out += '+';
    out += to_lower(trim(k));
  }
  return out;
}

std::string describe(const ActionRecord& action) {
  return std::visit(
      Overloaded{
          [](const Click& a) {
            return "click (" + std::to_string(a.x) + ", " + std::to_string(a.y) + ")";
          },
          [](const DoubleClick& a) {
            return "double_click (" + std::to_string(a.x) + ", " +
                   std::to_string(a.y) + ")";
          },
          [](const TypeText& a) { return "type_text \"" + a.text + "\""; },
          [](const KeyPress& a) { return "key_press " + key_combo(a.keys); },
          [](const Wait& a) { return "wait " + std::to_string(a.millis) + "ms"; },
      },
      action);
}

json action_to_json(const ActionRecord& action) {
  return std::visit(
      Overloaded{
          [](const Click& a) { return json{{"type", "click"}, {"x", a.x}, {"y", a.y}}; },
          [](const DoubleClick& a) {
            return json{{"type", "double_click"}, {"x", a.x}, {"y", a.y}};
          },
          [](const TypeText& a) { return json{{"type", "type_text"}, {"text", a.text}}; },
          [](const KeyPress& a) { return json{{"type", "key_press"}, {"keys", a.keys}}; },
          [](const Wait& a) { return json{{"type", "wait"}, {"millis", a.millis}}; },
      },
      action);
}

ActionRecord action_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw Error(ErrorCode::kParse, "action must be an object with a string 'type'");
  }
  const auto type = j.at("type").get<std::string>();
  if (type == "click") return Click{require_int(j, "x"), require_int(j, "y")};
  if (type == "double_click") {
    return DoubleClick{require_int(j, "x"), require_int(j, "y")};
  }
  if (type == "type_text") {
    if (!j.contains("text") || !j.at("text").is_string()) {
      throw Error(ErrorCode::kParse, "type_text needs a string 'text'");
    }
    return TypeText{j.at("text").get<std::string>()};
  }
  if (type == "key_press") {
    if (!j.contains("keys") || !j.at("keys").is_array()) {
      throw Error(ErrorCode::kParse, "key_press needs a 'keys' array");
    }
    KeyPress kp;
    for (const auto& k : j.at("keys")) {
      if (!k.is_string()) throw Error(ErrorCode::kParse, "key names must be strings");
      kp.keys.push_back(k.get<std::string>());
    }
    return kp;
  }
  if (type == "wait") {
    if (!j.contains("millis") || !j.at("millis").is_number_integer()) {
      throw Error(ErrorCode::kParse, "wait needs an integer 'millis'");
    }
    return Wait{j.at("millis").get<std::int64_t>()};
  }
  throw Error(ErrorCode::kParse, "unknown action type '" + type + "'");
}

}  // namespace cuaeval
