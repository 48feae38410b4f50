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

// Goal predicates over simulated desktop state.
//
// Grammar (lowest to highest precedence):
//   expr    := and ( "||" and )*
//   and     := unary ( "&&" unary )*
//   unary   := "!" unary | "(" expr ")" | atom
//   atom    := "focused" "==" NAME
//            | NAME "." NAME "==" value
//   value   := NAME | '"' chars '"'
// NAME is [A-Za-z0-9_-]+. Quoted values may contain \" and \\ escapes.

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cuaeval/sim/state.hpp"

namespace cuaeval::sim {

struct AppRegistry;

struct FieldAtom {
  std::string app;
  std::string field;
  std::string value;
  bool operator==(const FieldAtom&) const = default;
};

struct FocusAtom {
  std::string app;
  bool operator==(const FocusAtom&) const = default;
};

using Atom = std::variant<FieldAtom, FocusAtom>;

/// Renders an atom back to predicate syntax, e.g. `settings.appearance == dark`.
std::string to_string(const Atom& atom);

struct PredicateNode {
  enum class Kind { kAtom, kNot, kAnd, kOr };
  Kind kind = Kind::kAtom;
  Atom atom;
  std::vector<std::shared_ptr<const PredicateNode>> children;
};

class GoalPredicate {
 public:
  /// Throws kParse with the offending character offset.
  static GoalPredicate parse(std::string_view source);

  const std::string& source() const { return source_; }
  const PredicateNode& root() const { return *root_; }

 private:
  GoalPredicate(std::string source, std::shared_ptr<const PredicateNode> root)
      : source_(std::move(source)), root_(std::move(root)) {}

  std::string source_;
  std::shared_ptr<const PredicateNode> root_;
};

/// Pure evaluation. Throws kNotFound if the predicate names an app or field
/// absent from `state`.
bool check_goal(const SimDesktopState& state, const GoalPredicate& predicate);

struct AtomStatus {
  Atom atom;
  bool holds = false;
  // Whether the predicate wants this atom true (false under an odd number of
  // negations).
  bool wanted = true;

  bool satisfied() const { return holds == wanted; }
};

/// Every atom in source order with its current truth value.
std::vector<AtomStatus> atom_statuses(const SimDesktopState& state,
                                      const GoalPredicate& predicate);

/// References that do not resolve against the declared apps: unknown app,
/// unknown field, or a value outside a field's enum. Empty means closed.
std::vector<std::string> closure_problems(const GoalPredicate& predicate,
                                          const AppRegistry& apps);

}  // namespace cuaeval::sim
