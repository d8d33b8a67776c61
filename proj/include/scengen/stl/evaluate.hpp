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

#ifndef SCENGEN_STL_EVALUATE_HPP
#define SCENGEN_STL_EVALUATE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "scengen/error.hpp"
#include "scengen/format.hpp"
#include "scengen/stl/formula.hpp"
#include "scengen/stl/trace.hpp"

namespace scengen::stl {

namespace detail {

constexpr double kGridEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Window bounds in seconds map to sample offsets by rounding inward:
// [t + a, t + b] covers offsets ceil(a/dt) .. floor(b/dt), with a small
// epsilon so exact multiples of dt are not lost to floating point.
inline std::ptrdiff_t lower_offset(double a, double dt) {
  return static_cast<std::ptrdiff_t>(std::ceil(a / dt - kGridEps));
}

inline std::ptrdiff_t upper_offset(double b, double dt, std::ptrdiff_t cap) {
  if (std::isinf(b)) return cap;
  double v = std::floor(b / dt + kGridEps);
  if (v >= static_cast<double>(cap)) return cap;
  if (v < 0.0) return -1;
  return static_cast<std::ptrdiff_t>(v);
}

inline std::vector<double> eval_expr(const Expr& e, const Trace& tr) {
  std::size_t n = tr.size();
  switch (e.op()) {
    case Expr::Op::Constant:
      return std::vector<double>(n, e.value());
    case Expr::Op::Signal:
      return tr.signal(e.name());
    case Expr::Op::Neg: {
      std::vector<double> a = eval_expr(*e.lhs(), tr);
      for (double& v : a) v = -v;
      return a;
    }
    case Expr::Op::Abs: {
      std::vector<double> a = eval_expr(*e.lhs(), tr);
      for (double& v : a) v = std::fabs(v);
      return a;
    }
    default:
      break;
  }
  std::vector<double> a = eval_expr(*e.lhs(), tr);
  std::vector<double> b = eval_expr(*e.rhs(), tr);
  for (std::size_t i = 0; i < n; ++i) {
    switch (e.op()) {
      case Expr::Op::Add: a[i] += b[i]; break;
      case Expr::Op::Sub: a[i] -= b[i]; break;
      case Expr::Op::Mul: a[i] *= b[i]; break;
      case Expr::Op::Div: a[i] /= b[i]; break;
      case Expr::Op::Min: a[i] = std::min(a[i], b[i]); break;
      case Expr::Op::Max: a[i] = std::max(a[i], b[i]); break;
      default: break;
    }
  }
  return a;
}

inline std::vector<double> predicate_values(const Expr& e, const Trace& tr) {
  std::vector<double> v = eval_expr(e, tr);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericError(
          "predicate expression is non-finite at t = " +
          format_double(tr.start_time() + static_cast<double>(i) * tr.dt()));
    }
  }
  return v;
}

// Robustness of f at every sample where the trace is long enough to decide
// it. The returned vector may be shorter than the trace; index k past its
// end means the formula's windows run off the recorded horizon at that
// instant.
inline std::vector<double> rho_signal(const Formula& f, const Trace& tr) {
  const double dt = tr.dt();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(tr.size());
  switch (f.kind()) {
    case Formula::Kind::True:
      return std::vector<double>(tr.size(), kInf);
    case Formula::Kind::Predicate:
      return predicate_values(*f.pred(), tr);
    case Formula::Kind::Not: {
      std::vector<double> a = rho_signal(*f.lhs(), tr);
      for (double& v : a) v = -v;
      return a;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<double> a = rho_signal(*f.lhs(), tr);
      std::vector<double> b = rho_signal(*f.rhs(), tr);
      std::size_t len = std::min(a.size(), b.size());
      a.resize(len);
      const bool is_and = f.kind() == Formula::Kind::And;
      for (std::size_t i = 0; i < len; ++i) {
        a[i] = is_and ? std::min(a[i], b[i]) : std::max(a[i], b[i]);
      }
      return a;
    }
    case Formula::Kind::Eventually:
    case Formula::Kind::Always: {
      std::vector<double> c = rho_signal(*f.lhs(), tr);
      const std::ptrdiff_t len_c = static_cast<std::ptrdiff_t>(c.size());
      const std::ptrdiff_t ia = lower_offset(f.window_lo(), dt);
      const std::ptrdiff_t ib = upper_offset(f.window_hi(), dt, n);
      if (ib < ia) {
        throw ValidationError("empty evaluation window in '" + to_string(f) +
                              "'");
      }
      const std::ptrdiff_t len = len_c - ia;
      if (len <= 0) return {};
      const bool is_f = f.kind() == Formula::Kind::Eventually;
      std::vector<double> out(static_cast<std::size_t>(len));
      for (std::ptrdiff_t k = 0; k < len; ++k) {
        const std::ptrdiff_t hi = std::min(k + ib, len_c - 1);
        double acc = is_f ? -kInf : kInf;
        for (std::ptrdiff_t j = k + ia; j <= hi; ++j) {
          acc = is_f ? std::max(acc, c[static_cast<std::size_t>(j)])
                     : std::min(acc, c[static_cast<std::size_t>(j)]);
        }
        out[static_cast<std::size_t>(k)] = acc;
      }
      return out;
    }
    case Formula::Kind::Until: {
      std::vector<double> a = rho_signal(*f.lhs(), tr);
      std::vector<double> b = rho_signal(*f.rhs(), tr);
      const std::ptrdiff_t len_ab =
          static_cast<std::ptrdiff_t>(std::min(a.size(), b.size()));
      const std::ptrdiff_t ia = lower_offset(f.window_lo(), dt);
      const std::ptrdiff_t ib = upper_offset(f.window_hi(), dt, n);
      if (ib < ia) {
        throw ValidationError("empty evaluation window in '" + to_string(f) +
                              "'");
      }
      const std::ptrdiff_t len = len_ab - ia;
      if (len <= 0) return {};
      std::vector<double> out(static_cast<std::size_t>(len));
      for (std::ptrdiff_t k = 0; k < len; ++k) {
        const std::ptrdiff_t hi = std::min(k + ib, len_ab - 1);
        double best = -kInf;
        double run_min = kInf;
        for (std::ptrdiff_t tau = k; tau <= hi; ++tau) {
          run_min = std::min(run_min, a[static_cast<std::size_t>(tau)]);
          if (tau >= k + ia) {
            best = std::max(
                best, std::min(b[static_cast<std::size_t>(tau)], run_min));
          }
        }
        out[static_cast<std::size_t>(k)] = best;
      }
      return out;
    }
  }
  return {};
}

inline std::vector<char> sat_signal(const Formula& f, const Trace& tr) {
  const double dt = tr.dt();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(tr.size());
  switch (f.kind()) {
    case Formula::Kind::True:
      return std::vector<char>(tr.size(), 1);
    case Formula::Kind::Predicate: {
      std::vector<double> v = predicate_values(*f.pred(), tr);
      std::vector<char> out(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? 1 : 0;
      return out;
    }
    case Formula::Kind::Not: {
      std::vector<char> a = sat_signal(*f.lhs(), tr);
      for (char& v : a) v = v ? 0 : 1;
      return a;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<char> a = sat_signal(*f.lhs(), tr);
      std::vector<char> b = sat_signal(*f.rhs(), tr);
      std::size_t len = std::min(a.size(), b.size());
      a.resize(len);
      const bool is_and = f.kind() == Formula::Kind::And;
      for (std::size_t i = 0; i < len; ++i) {
        a[i] = is_and ? (a[i] && b[i]) : (a[i] || b[i]);
      }
      return a;
    }
    case Formula::Kind::Eventually:
    case Formula::Kind::Always: {
      std::vector<char> c = sat_signal(*f.lhs(), tr);
      const std::ptrdiff_t len_c = static_cast<std::ptrdiff_t>(c.size());
      const std::ptrdiff_t ia = lower_offset(f.window_lo(), dt);
      const std::ptrdiff_t ib = upper_offset(f.window_hi(), dt, n);
      if (ib < ia) {
        throw ValidationError("empty evaluation window in '" + to_string(f) +
                              "'");
      }
      const std::ptrdiff_t len = len_c - ia;
      if (len <= 0) return {};
      const bool is_f = f.kind() == Formula::Kind::Eventually;
      std::vector<char> out(static_cast<std::size_t>(len));
      for (std::ptrdiff_t k = 0; k < len; ++k) {
        const std::ptrdiff_t hi = std::min(k + ib, len_c - 1);
        char acc = is_f ? 0 : 1;
        for (std::ptrdiff_t j = k + ia; j <= hi; ++j) {
          char v = c[static_cast<std::size_t>(j)];
          acc = is_f ? (acc || v) : (acc && v);
        }
        out[static_cast<std::size_t>(k)] = acc;
      }
      return out;
    }
    case Formula::Kind::Until: {
      std::vector<char> a = sat_signal(*f.lhs(), tr);
      std::vector<char> b = sat_signal(*f.rhs(), tr);
      const std::ptrdiff_t len_ab =
          static_cast<std::ptrdiff_t>(std::min(a.size(), b.size()));
      const std::ptrdiff_t ia = lower_offset(f.window_lo(), dt);
      const std::ptrdiff_t ib = upper_offset(f.window_hi(), dt, n);
      if (ib < ia) {
        throw ValidationError("empty evaluation window in '" + to_string(f) +
                              "'");
      }
      const std::ptrdiff_t len = len_ab - ia;
      if (len <= 0) return {};
      std::vector<char> out(static_cast<std::size_t>(len));
      for (std::ptrdiff_t k = 0; k < len; ++k) {
        const std::ptrdiff_t hi = std::min(k + ib, len_ab - 1);
        char found = 0;
        char run_all = 1;
        for (std::ptrdiff_t tau = k; tau <= hi; ++tau) {
          run_all = run_all && a[static_cast<std::size_t>(tau)];
          if (tau >= k + ia && run_all && b[static_cast<std::size_t>(tau)]) {
            found = 1;
            break;
          }
        }
        out[static_cast<std::size_t>(k)] = found;
      }
      return out;
    }
  }
  return {};
}

inline std::size_t index_for_time(const Trace& tr, double t) {
  const double rel = (t - tr.start_time()) / tr.dt();
  const double last = static_cast<double>(tr.size() - 1);
  if (rel < -kGridEps || rel > last + kGridEps) {
    throw ValidationError("evaluation time t = " + format_double(t) +
                          " lies outside the trace");
  }
  double k = std::ceil(rel - kGridEps);
  if (k < 0.0) k = 0.0;
  if (k > last) k = last;
  return static_cast<std::size_t>(k);
}

}  // namespace detail

/// Quantitative robustness of f on the trace at time t (snapped to the
/// first sample at or after t). Positive means satisfied with margin,
/// negative violated. Throws ValidationError when the trace is too short
/// to decide f at t.
inline double eval_robustness(const Formula& f, const Trace& tr, double t) {
  std::size_t k = detail::index_for_time(tr, t);
  std::vector<double> sig = detail::rho_signal(f, tr);
  if (k >= sig.size()) {
    throw ValidationError("empty evaluation window: trace ends before '" +
                          to_string(f) + "' is decidable at t = " +
                          format_double(t));
  }
  return sig[k];
}

/// Boolean satisfaction of f at time t under the same window semantics as
/// eval_robustness. Predicates are strict: value > 0.
inline bool eval_boolean(const Formula& f, const Trace& tr, double t) {
  std::size_t k = detail::index_for_time(tr, t);
  std::vector<char> sig = detail::sat_signal(f, tr);
  if (k >= sig.size()) {
    throw ValidationError("empty evaluation window: trace ends before '" +
                          to_string(f) + "' is decidable at t = " +
                          format_double(t));
  }
  return sig[k] != 0;
}

/// Outcome cost of a trace: the robustness deficit at the trace start,
/// zero when the specification holds.
inline double cost(const Formula& f, const Trace& tr) {
  double rho = eval_robustness(f, tr, tr.start_time());
  return rho < 0.0 ? -rho : 0.0;
}

inline double eval_robustness(const FormulaPtr& f, const Trace& tr, double t) {
  return eval_robustness(*f, tr, t);
}
inline bool eval_boolean(const FormulaPtr& f, const Trace& tr, double t) {
  return eval_boolean(*f, tr, t);
}
inline double cost(const FormulaPtr& f, const Trace& tr) {
  return cost(*f, tr);
}

}  // namespace scengen::stl

#endif  // SCENGEN_STL_EVALUATE_HPP
