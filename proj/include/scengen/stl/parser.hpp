// Copyright 2026 The scengen Authors
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

#ifndef SCENGEN_STL_PARSER_HPP
#define SCENGEN_STL_PARSER_HPP

#include <cctype>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scengen/error.hpp"
#include "scengen/format.hpp"
#include "scengen/stl/formula.hpp"

namespace scengen::stl {

/// Grammar error with 1-based source position.
class ParseError : public ValidationError {
public:
  ParseError(const std::string& what, int line, int column)
      : ValidationError("syntax error at line " + std::to_string(line) +
                        ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

namespace detail {

enum class Tok {
  End,
  Number,
  Ident,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Plus,
  Minus,
  Star,
  Slash,
  Greater,    // also matches >=; both denote the predicate "expr > 0"
  KwTrue,
  KwNot,
  KwAnd,
  KwOr,
  KwUntil,
  KwEventually,
  KwAlways,
  KwMin,
  KwMax,
  KwAbs,
};

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

inline std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto push = [&](Tok kind, std::string text, double num = 0.0) {
    out.push_back(Token{kind, std::move(text), num, line, col});
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++col;
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() &&
             std::isdigit(static_cast<unsigned char>(src[j]))) {
        ++j;
      }
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() &&
               std::isdigit(static_cast<unsigned char>(src[j]))) {
          ++j;
        }
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          ++k;
          while (k < src.size() &&
                 std::isdigit(static_cast<unsigned char>(src[k]))) {
            ++k;
          }
          j = k;
        }
      }
      std::string text = src.substr(i, j - i);
      push(Tok::Number, text, parse_double(text));
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) ||
              src[j] == '_')) {
        ++j;
      }
      std::string text = src.substr(i, j - i);
      Tok kind = Tok::Ident;
      if (text == "true") kind = Tok::KwTrue;
      else if (text == "not") kind = Tok::KwNot;
      else if (text == "and") kind = Tok::KwAnd;
      else if (text == "or") kind = Tok::KwOr;
      else if (text == "U") kind = Tok::KwUntil;
      else if (text == "F") kind = Tok::KwEventually;
      else if (text == "G") kind = Tok::KwAlways;
      else if (text == "min") kind = Tok::KwMin;
      else if (text == "max") kind = Tok::KwMax;
      else if (text == "abs") kind = Tok::KwAbs;
      push(kind, std::move(text));
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    switch (c) {
      case '(': push(Tok::LParen, "("); break;
      case ')': push(Tok::RParen, ")"); break;
      case '[': push(Tok::LBracket, "["); break;
      case ']': push(Tok::RBracket, "]"); break;
      case ',': push(Tok::Comma, ","); break;
      case '+': push(Tok::Plus, "+"); break;
      case '-': push(Tok::Minus, "-"); break;
      case '*': push(Tok::Star, "*"); break;
      case '/': push(Tok::Slash, "/"); break;
      case '>':
        if (i + 1 < src.size() && src[i + 1] == '=') {
          push(Tok::Greater, ">=");
          ++col;
          ++i;
        } else {
          push(Tok::Greater, ">");
        }
        break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'",
                         line, col);
    }
    ++col;
    ++i;
  }
  out.push_back(Token{Tok::End, "", 0.0, line, col});
  return out;
}

// Recursive descent over
//
//   formula  := or
//   or       := and ("or" and)*
//   and      := until ("and" until)*
//   until    := unary ("U" interval until)?        right associative
//   unary    := "not" unary | ("F"|"G") interval? unary | primary
//   primary  := "true" | "(" formula ")" | predicate
//   predicate:= expr (">"|">=") number
//   expr     := term (("+"|"-") term)*
//   term     := factor (("*"|"/") factor)*
//   factor   := number | signal | "-" factor | "(" expr ")"
//             | ("min"|"max") "(" expr "," expr ")" | "abs" "(" expr ")"
//
// "(" is ambiguous between a grouped formula and a grouped arithmetic
// expression ("F (1 - ttc > 0)" versus "F ((1 - ttc) > 0)"). primary tries
// the formula reading first and falls back to a predicate; the attempt
// that consumed more input wins error reporting.
class Parser {
public:
  explicit Parser(const std::string& src) : toks_(tokenize(src)) {}

  FormulaPtr parse() {
    FormulaPtr f = parse_or();
    expect(Tok::End, "unexpected trailing input");
    return f;
  }

private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& advance() { return toks_[pos_++]; }
  bool match(Tok kind) {
    if (peek().kind == kind) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(Tok kind, const std::string& msg) {
    if (!match(kind)) throw error(msg);
  }
  ParseError error(const std::string& msg) const {
    const Token& t = peek();
    std::string what = msg;
    if (t.kind != Tok::End) what += " near '" + t.text + "'";
    return ParseError(what, t.line, t.column);
  }

  FormulaPtr parse_or() {
    FormulaPtr f = parse_and();
    while (match(Tok::KwOr)) f = Formula::disjunction(f, parse_and());
    return f;
  }

  FormulaPtr parse_and() {
    FormulaPtr f = parse_until();
    while (match(Tok::KwAnd)) f = Formula::conjunction(f, parse_until());
    return f;
  }

  FormulaPtr parse_until() {
    FormulaPtr f = parse_unary();
    if (match(Tok::KwUntil)) {
      auto [lo, hi] = parse_interval();
      return Formula::until(f, parse_until(), lo, hi);
    }
    return f;
  }

  FormulaPtr parse_unary() {
    if (match(Tok::KwNot)) return Formula::negation(parse_unary());
    if (peek().kind == Tok::KwEventually || peek().kind == Tok::KwAlways) {
      bool ev = advance().kind == Tok::KwEventually;
      if (peek().kind == Tok::LBracket) {
        auto [lo, hi] = parse_interval();
        FormulaPtr f = parse_unary();
        return ev ? Formula::eventually(f, lo, hi) : Formula::always(f, lo, hi);
      }
      FormulaPtr f = parse_unary();
      return ev ? Formula::eventually(f) : Formula::always(f);
    }
    return parse_primary();
  }

  FormulaPtr parse_primary() {
    if (match(Tok::KwTrue)) return Formula::truth();
    if (peek().kind != Tok::LParen) return parse_predicate();

    std::size_t save = pos_;
    FormulaPtr as_formula;
    std::size_t formula_pos = save;
    std::optional<ParseError> formula_err;
    try {
      ++pos_;  // consume "("
      FormulaPtr inner = parse_or();
      expect(Tok::RParen, "expected ')'");
      Tok next = peek().kind;
      if (next != Tok::Greater && next != Tok::Plus && next != Tok::Minus &&
          next != Tok::Star && next != Tok::Slash) {
        return inner;
      }
      // "( ... ) >" and friends continue an arithmetic expression.
    } catch (const ParseError& e) {
      formula_err = e;
      formula_pos = pos_;
    }
    pos_ = save;
    try {
      return parse_predicate();
    } catch (const ParseError&) {
      if (formula_err && formula_pos > pos_) throw *formula_err;
      throw;
    }
  }

  FormulaPtr parse_predicate() {
    ExprPtr e = parse_expr();
    if (peek().kind != Tok::Greater) {
      throw error("expected '>' or '>=' after expression");
    }
    ++pos_;
    double threshold = parse_signed_number("comparison threshold");
    if (threshold > 0.0) e = Expr::sub(e, Expr::constant(threshold));
    if (threshold < 0.0) e = Expr::add(e, Expr::constant(-threshold));
    return Formula::predicate(e);
  }

  std::pair<double, double> parse_interval() {
    expect(Tok::LBracket, "expected '[' to open interval");
    double lo = parse_signed_number("interval bound");
    expect(Tok::Comma, "expected ',' in interval");
    double hi;
    if (peek().kind == Tok::Ident && peek().text == "inf") {
      ++pos_;
      hi = Formula::kUnbounded;
    } else {
      hi = parse_signed_number("interval bound");
    }
    expect(Tok::RBracket, "expected ']' to close interval");
    if (lo < 0.0 || !(lo <= hi)) {
      throw error("malformed interval [" + format_double(lo) + "," +
                  (std::isinf(hi) ? std::string("inf") : format_double(hi)) +
                  "]");
    }
    return {lo, hi};
  }

  double parse_signed_number(const std::string& what) {
    bool negate = match(Tok::Minus);
    if (peek().kind != Tok::Number) throw error("expected " + what);
    double v = advance().number;
    return negate ? -v : v;
  }

  ExprPtr parse_expr() {
    ExprPtr e = parse_term();
    for (;;) {
      if (match(Tok::Plus)) e = Expr::add(e, parse_term());
      else if (match(Tok::Minus)) e = Expr::sub(e, parse_term());
      else return e;
    }
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_factor();
    for (;;) {
      if (match(Tok::Star)) e = Expr::mul(e, parse_factor());
      else if (match(Tok::Slash)) e = Expr::div(e, parse_factor());
      else return e;
    }
  }

  ExprPtr parse_factor() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number:
        ++pos_;
        return Expr::constant(t.number);
      case Tok::Minus:
        ++pos_;
        return Expr::neg(parse_factor());
      case Tok::LParen: {
        ++pos_;
        ExprPtr e = parse_expr();
        expect(Tok::RParen, "expected ')'");
        return e;
      }
      case Tok::KwMin:
      case Tok::KwMax: {
        bool is_min = t.kind == Tok::KwMin;
        ++pos_;
        expect(Tok::LParen, "expected '(' after function name");
        ExprPtr a = parse_expr();
        expect(Tok::Comma, "expected ',' between function arguments");
        ExprPtr b = parse_expr();
        expect(Tok::RParen, "expected ')'");
        return is_min ? Expr::min(a, b) : Expr::max(a, b);
      }
      case Tok::KwAbs: {
        ++pos_;
        expect(Tok::LParen, "expected '(' after function name");
        ExprPtr a = parse_expr();
        expect(Tok::RParen, "expected ')'");
        return Expr::abs(a);
      }
      case Tok::Ident: {
        ++pos_;
        if (peek().kind == Tok::LParen) {
          throw ParseError("unknown function '" + t.text + "'", t.line,
                           t.column);
        }
        return Expr::signal(t.text);
      }
      default:
        throw error("expected expression");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses an STL formula; throws ParseError on bad input.
inline FormulaPtr parse_formula(const std::string& text) {
  return detail::Parser(text).parse();
}

}  // namespace scengen::stl

#endif  // SCENGEN_STL_PARSER_HPP
