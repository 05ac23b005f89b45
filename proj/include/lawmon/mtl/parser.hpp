// Copyright 2026 The lawmon Authors
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

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "lawmon/mtl/formula.hpp"

namespace lawmon::mtl {

namespace detail {

// Grammar, loosest binding first:
//   iff     := or ( "<->" or )*
//   or      := and ( "||" and )*
//   and     := until ( "&&" until )*
//   until   := unary ( "U" [interval] until )?
//   unary   := "!" unary | ("G"|"F"|"P"|"O") [interval] unary | primary
//   primary := "T" | atom | "(" iff ")"
class Parser {
 public:
  Parser(std::string_view text, const AtomRegistry& reg) : s_(text), reg_(reg) {}

  Formula parse() {
    skip_ws();
    if (pos_ == s_.size()) fail("empty formula");
    Formula f = parse_iff();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(pos_, what); }
  [[noreturn]] void fail_at(std::size_t p, const std::string& what) const { throw ParseError(p, what); }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(std::string_view tok) {
    skip_ws();
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  static bool ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  }

  // Reads an identifier-shaped word without consuming it.
  std::string_view peek_word() {
    skip_ws();
    std::size_t e = pos_;
    if (e < s_.size() && (ident_char(s_[e]) && !(s_[e] >= '0' && s_[e] <= '9'))) {
      while (e < s_.size() && ident_char(s_[e])) ++e;
    }
    return s_.substr(pos_, e - pos_);
  }

  double parse_number(bool allow_inf) {
    skip_ws();
    std::size_t start = pos_;
    if (allow_inf && peek_word() == "inf") {
      pos_ += 3;
      return kInfinity;
    }
    std::size_t e = pos_;
    while (e < s_.size() && ((s_[e] >= '0' && s_[e] <= '9') || s_[e] == '.')) ++e;
    if (e < s_.size() && (s_[e] == 'e' || s_[e] == 'E')) {
      std::size_t x = e + 1;
      if (x < s_.size() && (s_[x] == '+' || s_[x] == '-')) ++x;
      if (x < s_.size() && s_[x] >= '0' && s_[x] <= '9') {
        e = x;
        while (e < s_.size() && s_[e] >= '0' && s_[e] <= '9') ++e;
      }
    }
    if (e == start) {
      if (start < s_.size() && s_[start] == '-') fail("negative interval bound");
      fail("expected a number");
    }
    double v = 0.0;
    auto res = std::from_chars(s_.data() + start, s_.data() + e, v);
    if (res.ec != std::errc() || res.ptr != s_.data() + e) fail_at(start, "malformed number");
    pos_ = e;
    return v;
  }

  Interval parse_interval() {
    std::size_t start = pos_;
    expect("[");
    Interval i;
    i.lo = parse_number(false);
    expect(",");
    i.hi = parse_number(true);
    expect("]");
    if (i.hi < i.lo) fail_at(start, "malformed interval: lower bound exceeds upper bound");
    return i;
  }

  Formula parse_iff() {
    Formula f = parse_or();
    while (accept("<->")) f = iff(f, parse_or());
    return f;
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (accept("||")) f = f || parse_and();
    return f;
  }

  Formula parse_and() {
    Formula f = parse_until();
    while (accept("&&")) f = f && parse_until();
    return f;
  }

  Formula parse_until() {
    Formula f = parse_unary();
    if (peek_word() == "U") {
      ++pos_;
      Interval i;
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == '[') i = parse_interval();
      return until(f, parse_until(), i);
    }
    return f;
  }

  Formula parse_unary() {
    if (accept("!")) return !parse_unary();
    std::string_view w = peek_word();
    if (w == "G" || w == "F" || w == "P" || w == "O") {
      ++pos_;
      Interval i;
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == '[') i = parse_interval();
      Formula body = parse_unary();
      Op op = w == "G" ? Op::Globally : w == "F" ? Op::Future : w == "P" ? Op::Previously : Op::Once;
      return Formula::make(op, {}, i, {body});
    }
    return parse_primary();
  }

  Formula parse_primary() {
    skip_ws();
    if (pos_ == s_.size()) fail("unexpected end of formula");
    if (accept("(")) {
      Formula f = parse_iff();
      expect(")");
      return f;
    }
    std::string_view w = peek_word();
    if (w.empty()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    if (w == "T") {
      pos_ += 1;
      return top();
    }
    if (is_reserved_word(w)) fail("unexpected keyword '" + std::string(w) + "'");
    if (!reg_.contains(w)) fail("unknown atom '" + std::string(w) + "'");
    pos_ += w.size();
    return atom(std::string(w));
  }

  std::string_view s_;
  const AtomRegistry& reg_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses formula DSL text. Every atom must be declared in `atoms`.
inline Formula parse_formula(std::string_view text, const AtomRegistry& atoms) {
  if (atoms.empty()) throw InputError("atom registry is empty");
  return detail::Parser(text, atoms).parse();
}

/// One named rule in a formula file.
struct NamedFormula {
  std::string name;
  Formula formula;
  std::size_t line = 0;
};

/// Parses a rule file: one `name = formula` per line, `#` starts a comment.
/// Error positions are columns within the offending line.
inline std::vector<NamedFormula> parse_formula_file(std::string_view text, const AtomRegistry& atoms) {
  std::vector<NamedFormula> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(line_no, 0, "expected 'name = formula'");
    }
    std::string_view name = line.substr(0, eq);
    name.remove_prefix(std::min(name.find_first_not_of(" \t"), name.size()));
    name.remove_suffix(name.size() - std::min(name.find_last_not_of(" \t") + 1, name.size()));
    if (name.empty()) throw ParseError(line_no, 0, "missing rule name");
    try {
      out.push_back({std::string(name), parse_formula(line.substr(eq + 1), atoms), line_no});
    } catch (const ParseError& e) {
      throw ParseError(line_no, eq + 1 + e.position(), e.detail());
    }
    if (end == text.size()) break;
  }
  return out;
}

}  // namespace lawmon::mtl
