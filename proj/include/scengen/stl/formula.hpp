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

#ifndef SCENGEN_STL_FORMULA_HPP
#define SCENGEN_STL_FORMULA_HPP

#include <cmath>
#include <limits>
#include <memory>
#include <set>
#include <string>
#include <utility>

#include "scengen/error.hpp"
#include "scengen/format.hpp"

namespace scengen::stl {

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Arithmetic expression over trace signals, evaluated sample by sample.
/// A predicate interprets its expression e as the atomic proposition e > 0
/// with quantitative robustness equal to the value of e itself.
class Expr {
public:
  enum class Op { Constant, Signal, Add, Sub, Mul, Div, Neg, Min, Max, Abs };

  static ExprPtr constant(double v) {
    if (!std::isfinite(v)) throw ValidationError("expr: non-finite constant");
    return make(Op::Constant, v, {}, nullptr, nullptr);
  }
  static ExprPtr signal(std::string name) {
    if (name.empty()) throw ValidationError("expr: empty signal name");
    return make(Op::Signal, 0.0, std::move(name), nullptr, nullptr);
  }
  static ExprPtr add(ExprPtr a, ExprPtr b) { return binary(Op::Add, a, b); }
  static ExprPtr sub(ExprPtr a, ExprPtr b) { return binary(Op::Sub, a, b); }
  static ExprPtr mul(ExprPtr a, ExprPtr b) { return binary(Op::Mul, a, b); }
  static ExprPtr div(ExprPtr a, ExprPtr b) { return binary(Op::Div, a, b); }
  static ExprPtr min(ExprPtr a, ExprPtr b) { return binary(Op::Min, a, b); }
  static ExprPtr max(ExprPtr a, ExprPtr b) { return binary(Op::Max, a, b); }
  static ExprPtr neg(ExprPtr a) {
    require(a);
    return make(Op::Neg, 0.0, {}, std::move(a), nullptr);
  }
  static ExprPtr abs(ExprPtr a) {
    require(a);
    return make(Op::Abs, 0.0, {}, std::move(a), nullptr);
  }

  Op op() const { return op_; }
  double value() const { return value_; }
  const std::string& name() const { return name_; }
  const ExprPtr& lhs() const { return lhs_; }
  const ExprPtr& rhs() const { return rhs_; }

  void collect_signals(std::set<std::string>& out) const {
    if (op_ == Op::Signal) out.insert(name_);
    if (lhs_) lhs_->collect_signals(out);
    if (rhs_) rhs_->collect_signals(out);
  }

private:
  Expr(Op op, double value, std::string name, ExprPtr lhs, ExprPtr rhs)
      : op_(op),
        value_(value),
        name_(std::move(name)),
        lhs_(std::move(lhs)),
        rhs_(std::move(rhs)) {}

  static void require(const ExprPtr& p) {
    if (!p) throw ValidationError("expr: null operand");
  }
  static ExprPtr binary(Op op, ExprPtr& a, ExprPtr& b) {
    require(a);
    require(b);
    return make(op, 0.0, {}, std::move(a), std::move(b));
  }
  static ExprPtr make(Op op, double value, std::string name, ExprPtr lhs,
                      ExprPtr rhs) {
    return ExprPtr(
        new Expr(op, value, std::move(name), std::move(lhs), std::move(rhs)));
  }

  Op op_;
  double value_;
  std::string name_;
  ExprPtr lhs_;
  ExprPtr rhs_;
};

inline bool equal(const Expr& a, const Expr& b) {
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Expr::Op::Constant:
      return a.value() == b.value();
    case Expr::Op::Signal:
      return a.name() == b.name();
    default:
      break;
  }
  if (static_cast<bool>(a.lhs()) != static_cast<bool>(b.lhs())) return false;
  if (static_cast<bool>(a.rhs()) != static_cast<bool>(b.rhs())) return false;
  if (a.lhs() && !equal(*a.lhs(), *b.lhs())) return false;
  if (a.rhs() && !equal(*a.rhs(), *b.rhs())) return false;
  return true;
}

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Signal temporal logic formula. Temporal windows are measured in seconds
/// relative to the evaluation instant; an untimed F or G spans the rest of
/// the trace. Until requires an explicit interval.
class Formula {
public:
  enum class Kind { True, Predicate, Not, And, Or, Until, Eventually, Always };

  static constexpr double kUnbounded =
      std::numeric_limits<double>::infinity();

  static FormulaPtr truth() {
    return make(Kind::True, nullptr, nullptr, nullptr, 0.0, kUnbounded, false);
  }
  static FormulaPtr predicate(ExprPtr e) {
    if (!e) throw ValidationError("formula: null predicate expression");
    return make(Kind::Predicate, std::move(e), nullptr, nullptr, 0.0,
                kUnbounded, false);
  }
  static FormulaPtr negation(FormulaPtr f) {
    require(f);
    return make(Kind::Not, nullptr, std::move(f), nullptr, 0.0, kUnbounded,
                false);
  }
  static FormulaPtr conjunction(FormulaPtr a, FormulaPtr b) {
    require(a);
    require(b);
    return make(Kind::And, nullptr, std::move(a), std::move(b), 0.0,
                kUnbounded, false);
  }
  static FormulaPtr disjunction(FormulaPtr a, FormulaPtr b) {
    require(a);
    require(b);
    return make(Kind::Or, nullptr, std::move(a), std::move(b), 0.0, kUnbounded,
                false);
  }
  static FormulaPtr until(FormulaPtr a, FormulaPtr b, double lo, double hi) {
    require(a);
    require(b);
    check_interval(lo, hi);
    return make(Kind::Until, nullptr, std::move(a), std::move(b), lo, hi,
                true);
  }
  static FormulaPtr eventually(FormulaPtr f) {
    require(f);
    return make(Kind::Eventually, nullptr, std::move(f), nullptr, 0.0,
                kUnbounded, false);
  }
  static FormulaPtr eventually(FormulaPtr f, double lo, double hi) {
    require(f);
    check_interval(lo, hi);
    return make(Kind::Eventually, nullptr, std::move(f), nullptr, lo, hi,
                true);
  }
  static FormulaPtr always(FormulaPtr f) {
    require(f);
    return make(Kind::Always, nullptr, std::move(f), nullptr, 0.0, kUnbounded,
                false);
  }
  static FormulaPtr always(FormulaPtr f, double lo, double hi) {
    require(f);
    check_interval(lo, hi);
    return make(Kind::Always, nullptr, std::move(f), nullptr, lo, hi, true);
  }

  Kind kind() const { return kind_; }
  const ExprPtr& pred() const { return pred_; }
  const FormulaPtr& lhs() const { return lhs_; }
  const FormulaPtr& rhs() const { return rhs_; }
  /// Window bounds in seconds; hi may be kUnbounded.
  double window_lo() const { return lo_; }
  double window_hi() const { return hi_; }
  /// Whether an interval was given explicitly (affects printing only).
  bool timed() const { return timed_; }

  void collect_signals(std::set<std::string>& out) const {
    if (pred_) pred_->collect_signals(out);
    if (lhs_) lhs_->collect_signals(out);
    if (rhs_) rhs_->collect_signals(out);
  }

private:
  Formula(Kind kind, ExprPtr pred, FormulaPtr lhs, FormulaPtr rhs, double lo,
          double hi, bool timed)
      : kind_(kind),
        pred_(std::move(pred)),
        lhs_(std::move(lhs)),
        rhs_(std::move(rhs)),
        lo_(lo),
        hi_(hi),
        timed_(timed) {}

  static void require(const FormulaPtr& p) {
    if (!p) throw ValidationError("formula: null operand");
  }
  static void check_interval(double lo, double hi) {
    if (!(lo >= 0.0) || !std::isfinite(lo) || std::isnan(hi) || !(lo <= hi)) {
      throw ValidationError("formula: malformed interval [" +
                            format_double(lo) + "," + format_double(hi) + "]");
    }
  }
  static FormulaPtr make(Kind kind, ExprPtr pred, FormulaPtr lhs,
                         FormulaPtr rhs, double lo, double hi, bool timed) {
    return FormulaPtr(new Formula(kind, std::move(pred), std::move(lhs),
                                  std::move(rhs), lo, hi, timed));
  }

  Kind kind_;
  ExprPtr pred_;
  FormulaPtr lhs_;
  FormulaPtr rhs_;
  double lo_;
  double hi_;
  bool timed_;
};

inline bool equal(const Formula& a, const Formula& b) {
  if (a.kind() != b.kind()) return false;
  if (a.timed() != b.timed()) return false;
  if (a.timed() && (a.window_lo() != b.window_lo() ||
                    a.window_hi() != b.window_hi())) {
    return false;
  }
  if (static_cast<bool>(a.pred()) != static_cast<bool>(b.pred())) return false;
  if (a.pred() && !equal(*a.pred(), *b.pred())) return false;
  if (static_cast<bool>(a.lhs()) != static_cast<bool>(b.lhs())) return false;
  if (a.lhs() && !equal(*a.lhs(), *b.lhs())) return false;
  if (static_cast<bool>(a.rhs()) != static_cast<bool>(b.rhs())) return false;
  if (a.rhs() && !equal(*a.rhs(), *b.rhs())) return false;
  return true;
}

namespace detail {

// Expression precedence: additive 1, multiplicative 2, unary minus 3,
// atoms and calls 4.
inline int expr_prec(const Expr& e) {
  switch (e.op()) {
    case Expr::Op::Add:
    case Expr::Op::Sub:
      return 1;
    case Expr::Op::Mul:
    case Expr::Op::Div:
      return 2;
    case Expr::Op::Neg:
      return 3;
    default:
      return 4;
  }
}

inline void print_expr(const Expr& e, std::string& out);

inline void print_child(const Expr& child, int min_prec, std::string& out) {
  bool parens = expr_prec(child) < min_prec;
  if (parens) out += '(';
  print_expr(child, out);
  if (parens) out += ')';
}

inline void print_expr(const Expr& e, std::string& out) {
  int p = expr_prec(e);
  switch (e.op()) {
    case Expr::Op::Constant:
      out += format_double(e.value());
      return;
    case Expr::Op::Signal:
      out += e.name();
      return;
    case Expr::Op::Add:
      print_child(*e.lhs(), p, out);
      out += " + ";
      print_child(*e.rhs(), p + 1, out);
      return;
    case Expr::Op::Sub:
      print_child(*e.lhs(), p, out);
      out += " - ";
      print_child(*e.rhs(), p + 1, out);
      return;
    case Expr::Op::Mul:
      print_child(*e.lhs(), p, out);
      out += " * ";
      print_child(*e.rhs(), p + 1, out);
      return;
    case Expr::Op::Div:
      print_child(*e.lhs(), p, out);
      out += " / ";
      print_child(*e.rhs(), p + 1, out);
      return;
    case Expr::Op::Neg:
      out += '-';
      print_child(*e.lhs(), p, out);
      return;
    case Expr::Op::Min:
    case Expr::Op::Max:
      out += e.op() == Expr::Op::Min ? "min(" : "max(";
      print_expr(*e.lhs(), out);
      out += ", ";
      print_expr(*e.rhs(), out);
      out += ')';
      return;
    case Expr::Op::Abs:
      out += "abs(";
      print_expr(*e.lhs(), out);
      out += ')';
      return;
  }
}

// Formula precedence: or 1, and 2, U 3, unary 4, atoms 5. And/or print
// left associatively, U right associatively, matching the parser.
inline int formula_prec(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Or:
      return 1;
    case Formula::Kind::And:
      return 2;
    case Formula::Kind::Until:
      return 3;
    case Formula::Kind::Not:
    case Formula::Kind::Eventually:
    case Formula::Kind::Always:
      return 4;
    default:
      return 5;
  }
}

inline void print_formula(const Formula& f, std::string& out);

inline void print_child(const Formula& child, int min_prec, std::string& out) {
  bool parens = formula_prec(child) < min_prec;
  if (parens) out += '(';
  print_formula(child, out);
  if (parens) out += ')';
}

inline void print_window(const Formula& f, std::string& out) {
  out += '[';
  out += format_double(f.window_lo());
  out += ',';
  out += std::isinf(f.window_hi()) ? "inf" : format_double(f.window_hi());
  out += ']';
}

inline void print_formula(const Formula& f, std::string& out) {
  int p = formula_prec(f);
  switch (f.kind()) {
    case Formula::Kind::True:
      out += "true";
      return;
    case Formula::Kind::Predicate:
      out += '(';
      print_expr(*f.pred(), out);
      out += " > 0)";
      return;
    case Formula::Kind::Not:
      out += "not ";
      print_child(*f.lhs(), p, out);
      return;
    case Formula::Kind::And:
      print_child(*f.lhs(), p, out);
      out += " and ";
      print_child(*f.rhs(), p + 1, out);
      return;
    case Formula::Kind::Or:
      print_child(*f.lhs(), p, out);
      out += " or ";
      print_child(*f.rhs(), p + 1, out);
      return;
    case Formula::Kind::Until:
      print_child(*f.lhs(), p + 1, out);
      out += " U";
      print_window(f, out);
      out += ' ';
      print_child(*f.rhs(), p, out);
      return;
    case Formula::Kind::Eventually:
    case Formula::Kind::Always:
      out += f.kind() == Formula::Kind::Eventually ? 'F' : 'G';
      if (f.timed()) print_window(f, out);
      out += ' ';
      print_child(*f.lhs(), p, out);
      return;
  }
}

}  // namespace detail

inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print_expr(e, out);
  return out;
}

inline std::string to_string(const Formula& f) {
  std::string out;
  detail::print_formula(f, out);
  return out;
}

}  // namespace scengen::stl

#endif  // SCENGEN_STL_FORMULA_HPP
