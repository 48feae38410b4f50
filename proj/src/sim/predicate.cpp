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

#include "cuaeval/sim/predicate.hpp"

#include <cctype>

#include "cuaeval/error.hpp"
#include "cuaeval/sim/app_def.hpp"

namespace cuaeval::sim {

namespace {

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

bool is_plain_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!is_name_char(c)) return false;
  }
  return true;
}

enum class Tok { kName, kString, kDot, kEq, kAnd, kOr, kNot, kLParen, kRParen, kEnd };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) { advance(); }

  std::shared_ptr<const PredicateNode> parse() {
    auto node = parse_or();
    if (cur_.kind != Tok::kEnd) fail("unexpected trailing input");
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kParse, "predicate: " + what + " at offset " +
                                       std::to_string(cur_.pos) + " in '" +
                                       std::string(src_) + "'");
  }

  void advance() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
    std::size_t start = i_;
    if (i_ >= src_.size()) {
      cur_ = {Tok::kEnd, "", start};
      return;
    }
    char c = src_[i_];
    auto two = [&](char a, char b) {
      return c == a && i_ + 1 < src_.size() && src_[i_ + 1] == b;
    };
    if (two('=', '=')) {
      i_ += 2;
      cur_ = {Tok::kEq, "==", start};
    } else if (two('&', '&')) {
      i_ += 2;
      cur_ = {Tok::kAnd, "&&", start};
    } else if (two('|', '|')) {
      i_ += 2;
      cur_ = {Tok::kOr, "||", start};
    } else if (c == '!') {
      ++i_;
      cur_ = {Tok::kNot, "!", start};
    } else if (c == '(') {
      ++i_;
      cur_ = {Tok::kLParen, "(", start};
    } else if (c == ')') {
      ++i_;
      cur_ = {Tok::kRParen, ")", start};
    } else if (c == '.') {
      ++i_;
      cur_ = {Tok::kDot, ".", start};
    } else if (c == '"') {
      ++i_;
      std::string text;
      while (true) {
        if (i_ >= src_.size()) {
          cur_ = {Tok::kEnd, "", start};
          fail("unterminated string");
        }
        char d = src_[i_++];
        if (d == '"') break;
        if (d == '\\') {
          if (i_ >= src_.size()) {
            cur_ = {Tok::kEnd, "", start};
            fail("dangling escape");
          }
          d = src_[i_++];
        }
        text.push_back(d);
      }
      cur_ = {Tok::kString, std::move(text), start};
    } else if (is_name_char(c)) {
      while (i_ < src_.size() && is_name_char(src_[i_])) ++i_;
      cur_ = {Tok::kName, std::string(src_.substr(start, i_ - start)), start};
    } else {
      cur_ = {Tok::kEnd, "", start};
      fail(std::string("unexpected character '") + c + "'");
    }
  }

  std::string expect_name(const char* what) {
    if (cur_.kind != Tok::kName) fail(std::string("expected ") + what);
    std::string s = cur_.text;
    advance();
    return s;
  }

  void expect(Tok kind, const char* what) {
    if (cur_.kind != kind) fail(std::string("expected ") + what);
    advance();
  }

  static std::shared_ptr<const PredicateNode> binary(PredicateNode::Kind kind,
                                                     std::shared_ptr<const PredicateNode> l,
                                                     std::shared_ptr<const PredicateNode> r) {
    auto n = std::make_shared<PredicateNode>();
    n->kind = kind;
    n->children = {std::move(l), std::move(r)};
    return n;
  }

  std::shared_ptr<const PredicateNode> parse_or() {
    auto left = parse_and();
    while (cur_.kind == Tok::kOr) {
      advance();
      left = binary(PredicateNode::Kind::kOr, left, parse_and());
    }
    return left;
  }

  std::shared_ptr<const PredicateNode> parse_and() {
    auto left = parse_unary();
    while (cur_.kind == Tok::kAnd) {
      advance();
      left = binary(PredicateNode::Kind::kAnd, left, parse_unary());
    }
    return left;
  }

  std::shared_ptr<const PredicateNode> parse_unary() {
    if (cur_.kind == Tok::kNot) {
      advance();
      auto n = std::make_shared<PredicateNode>();
      n->kind = PredicateNode::Kind::kNot;
      n->children = {parse_unary()};
      return n;
    }
    if (cur_.kind == Tok::kLParen) {
      advance();
      auto inner = parse_or();
      expect(Tok::kRParen, "')'");
      return inner;
    }
    return parse_atom();
  }

  std::shared_ptr<const PredicateNode> parse_atom() {
    auto n = std::make_shared<PredicateNode>();
    n->kind = PredicateNode::Kind::kAtom;
    std::string first = expect_name("app name or 'focused'");
    if (first == "focused" && cur_.kind == Tok::kEq) {
      advance();
      n->atom = FocusAtom{expect_name("app name")};
      return n;
    }
    expect(Tok::kDot, "'.'");
    std::string field = expect_name("field name");
    expect(Tok::kEq, "'=='");
    std::string value;
    if (cur_.kind == Tok::kName || cur_.kind == Tok::kString) {
      value = cur_.text;
      advance();
    } else {
      fail("expected value");
    }
    n->atom = FieldAtom{std::move(first), std::move(field), std::move(value)};
    return n;
  }

  std::string_view src_;
  std::size_t i_ = 0;
  Token cur_{Tok::kEnd, "", 0};
};

bool eval_atom(const SimDesktopState& state, const Atom& atom) {
  if (const auto* f = std::get_if<FocusAtom>(&atom)) {
    if (!state.app_states.count(f->app)) {
      throw Error(ErrorCode::kNotFound, "predicate names unknown app '" + f->app + "'");
    }
    return state.focused_app == f->app;
  }
  const auto& fa = std::get<FieldAtom>(atom);
  auto app = state.app_states.find(fa.app);
  if (app == state.app_states.end()) {
    throw Error(ErrorCode::kNotFound, "predicate names unknown app '" + fa.app + "'");
  }
  auto field = app->second.find(fa.field);
  if (field == app->second.end()) {
    throw Error(ErrorCode::kNotFound,
                "predicate names unknown field '" + fa.app + "." + fa.field + "'");
  }
  return field->second == fa.value;
}

bool eval_node(const SimDesktopState& state, const PredicateNode& n) {
  switch (n.kind) {
    case PredicateNode::Kind::kAtom: return eval_atom(state, n.atom);
    case PredicateNode::Kind::kNot: return !eval_node(state, *n.children[0]);
    case PredicateNode::Kind::kAnd: {
      // Both sides are evaluated so unresolvable references always surface.
      bool l = eval_node(state, *n.children[0]);
      bool r = eval_node(state, *n.children[1]);
      return l && r;
    }
    case PredicateNode::Kind::kOr: {
      bool l = eval_node(state, *n.children[0]);
      bool r = eval_node(state, *n.children[1]);
      return l || r;
    }
  }
  return false;
}

void collect(const SimDesktopState& state, const PredicateNode& n, bool wanted,
             std::vector<AtomStatus>& out) {
  if (n.kind == PredicateNode::Kind::kAtom) {
    out.push_back({n.atom, eval_atom(state, n.atom), wanted});
    return;
  }
  bool child_wanted = n.kind == PredicateNode::Kind::kNot ? !wanted : wanted;
  for (const auto& c : n.children) collect(state, *c, child_wanted, out);
}

template <class Fn>
void visit_atoms(const PredicateNode& n, Fn&& fn) {
  if (n.kind == PredicateNode::Kind::kAtom) {
    fn(n.atom);
    return;
  }
  for (const auto& c : n.children) visit_atoms(*c, fn);
}

}  // namespace

std::string to_string(const Atom& atom) {
  if (const auto* f = std::get_if<FocusAtom>(&atom)) return "focused == " + f->app;
  const auto& fa = std::get<FieldAtom>(atom);
  std::string value = fa.value;
  if (!is_plain_name(value)) {
    std::string quoted = "\"";
    for (char c : value) {
      if (c == '"' || c == '\\') quoted.push_back('\\');
      quoted.push_back(c);
    }
    value = quoted + "\"";
  }
  return fa.app + "." + fa.field + " == " + value;
}

GoalPredicate GoalPredicate::parse(std::string_view source) {
  Parser p(source);
  return GoalPredicate(std::string(source), p.parse());
}

bool check_goal(const SimDesktopState& state, const GoalPredicate& predicate) {
  return eval_node(state, predicate.root());
}

std::vector<AtomStatus> atom_statuses(const SimDesktopState& state,
                                      const GoalPredicate& predicate) {
  std::vector<AtomStatus> out;
  collect(state, predicate.root(), true, out);
  return out;
}

std::vector<std::string> closure_problems(const GoalPredicate& predicate,
                                          const AppRegistry& apps) {
  std::vector<std::string> problems;
  visit_atoms(predicate.root(), [&](const Atom& atom) {
    if (const auto* f = std::get_if<FocusAtom>(&atom)) {
      if (!apps.contains(f->app)) problems.push_back("unknown app '" + f->app + "'");
      return;
    }
    const auto& fa = std::get<FieldAtom>(atom);
    if (!apps.contains(fa.app)) {
      problems.push_back("unknown app '" + fa.app + "'");
      return;
    }
    const auto& def = apps.at(fa.app);
    auto it = def.state_fields.find(fa.field);
    if (it == def.state_fields.end()) {
      problems.push_back("unknown field '" + fa.app + "." + fa.field + "'");
      return;
    }
    if (!it->second.accepts(fa.value)) {
      problems.push_back("value '" + fa.value + "' is not legal for '" + fa.app + "." +
                         fa.field + "'");
    }
  });
  return problems;
}

}  // namespace cuaeval::sim
