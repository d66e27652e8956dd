#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "gft/calculus.hpp"
#include "gft/canonical.hpp"
#include "gft/expr.hpp"
#include "gft/matrix.hpp"
#include "gft/oracle.hpp"
#include "gft/script/parser.hpp"
#include "gft/variation.hpp"

namespace gft::script {

struct RunOptions {
  bool oracle = false;
  int trials = 200;
  uint64_t seed = 0;
  bool fail_fast = false;
  int order_twice = 0;  // series truncation override for limit_c
  bool timings = false;
};

struct OracleSummary {
  bool checked = false;
  int trials = 0;
  bool equivalent = true;
  std::string witness;
};

struct AssertionRecord {
  int id = 0;
  std::string kind;
  std::string label;
  std::string status;    // pass | fail | unproven | error
  std::string residual;  // rendered canonical residual
  std::string tier;      // total-derivative/symmetry tier when applicable
  std::string detail;
  OracleSummary oracle;
  double elapsed_ms = 0.0;
};

struct RunReport {
  std::string script_name;
  std::vector<AssertionRecord> records;
  bool bind_error = false;
  bool engine_error = false;
  std::string status = "pass";
  int exit_code = 0;

  int passed = 0, failed = 0, unproven = 0, errors = 0;

  void finish() {
    passed = failed = unproven = errors = 0;
    for (const auto& r : records) {
      if (r.status == "pass")
        ++passed;
      else if (r.status == "fail")
        ++failed;
      else if (r.status == "unproven")
        ++unproven;
      else
        ++errors;
    }
    engine_error = errors > 0;
    bool ok = failed == 0 && unproven == 0 && errors == 0;
    status = ok ? "pass" : "fail";
    exit_code = engine_error ? 3 : (ok ? 0 : 1);
  }
};

namespace detail {

struct VarRef {
  size_t index;
};

using Value = std::variant<Expr, MatrixExpr, Spinor, RowSpinor, Parameterization, VarRef>;

inline const char* value_type_name(const Value& v) {
  switch (v.index()) {
    case 0: return "expression";
    case 1: return "matrix";
    case 2: return "spinor";
    case 3: return "row spinor";
    case 4: return "parameterization";
    default: return "variation";
  }
}

}  // namespace detail

// Executes a parsed script against the engine. One interpreter instance per
// run; all state (declarations, bindings, assumptions) is script-local.
class Interp {
 public:
  Interp(const Script& script, const RunOptions& options, std::ostream* human = nullptr)
      : script_(script), options_(options), human_(human) {}

  RunReport run() {
    RunReport report;
    report.script_name = script_.name;
    try {
      bind_check();
    } catch (const EngineError& err) {
      report.bind_error = true;
      report.status = "fail";
      report.exit_code = 2;
      if (human_) *human_ << "bind error: " << err.what() << "\n";
      AssertionRecord rec;
      rec.kind = "bind";
      rec.status = "error";
      rec.detail = err.what();
      report.records.push_back(rec);
      return report;
    }

    for (const auto& st : script_.statements) {
      cache_.clear();
      bool is_assert = statement_is_assert(st);
      try {
        execute(st, report);
      } catch (const EngineError& err) {
        AssertionRecord rec;
        rec.id = next_id_++;
        rec.kind = is_assert ? assert_kind_name(st.kind) : "statement";
        rec.label = st.label.empty() ? describe_statement(st) : st.label;
        rec.status = "error";
        rec.detail = std::string(err.what()) + " (line " + std::to_string(st.span.line) + ")";
        report.records.push_back(rec);
        emit(report.records.back());
      }
      if (options_.fail_fast && !report.records.empty() &&
          report.records.back().status != "pass")
        break;
    }
    report.finish();
    if (human_) {
      *human_ << "-- " << report.passed << " passed, " << report.failed << " failed";
      if (report.unproven) *human_ << ", " << report.unproven << " unproven";
      if (report.errors) *human_ << ", " << report.errors << " errors";
      *human_ << " (oracle " << (options_.oracle ? "on" : "off") << ", trials "
              << options_.trials << ", seed " << options_.seed << ")\n";
    }
    return report;
  }

 private:
  // ---------------------------------------------------------------------
  // Binding pass
  // ---------------------------------------------------------------------

  static bool statement_is_assert(const Statement& st) {
    using K = Statement::Kind;
    switch (st.kind) {
      case K::AssertZero:
      case K::AssertNonzero:
      case K::AssertEq:
      case K::AssertTotalDerivative:
      case K::AssertScalarMultiple:
      case K::AssertPauli:
        return true;
      default:
        return false;
    }
  }

  static const char* assert_kind_name(Statement::Kind k) {
    using K = Statement::Kind;
    switch (k) {
      case K::AssertZero: return "assert_zero";
      case K::AssertNonzero: return "assert_nonzero";
      case K::AssertEq: return "assert_eq";
      case K::AssertTotalDerivative: return "assert_matches_total_derivative";
      case K::AssertScalarMultiple: return "assert_scalar_multiple";
      case K::AssertPauli: return "assert_pauli";
      default: return "statement";
    }
  }

  static std::string describe_statement(const Statement& st) {
    std::string s = render_statement(st);
    if (s.size() > 60) s = s.substr(0, 57) + "...";
    return s;
  }

  bool is_builtin(const std::string& name) const {
    static const std::set<std::string> builtins = {
        "sqrt",   "chart", "subst",   "limit_c", "vary",  "Lop",     "euler_lagrange",
        "pd",     "momentum", "legendre", "det",  "metric", "wz",    "induced",
        "gauge",  "spinor", "frame",  "bar",     "entry", "wd"};
    return builtins.count(name) > 0;
  }

  bool is_prebound(const std::string& name) const {
    static const std::set<std::string> pre = {"c",      "I",      "alpha",  "t",     "x",
                                              "gamma0", "gamma1", "gamma2", "gamma5"};
    return pre.count(name) > 0;
  }

  void bind_check() {
    std::set<std::string> names = {"c", "I", "alpha", "t", "x", "gamma0", "gamma1", "gamma2",
                                   "gamma5"};
    std::function<void(const ExprNode&)> walk = [&](const ExprNode& n) {
      switch (n.kind) {
        case ExprNode::Kind::Name:
          if (!names.count(n.name))
            throw SyntaxError(n.span, "unknown identifier '" + n.name + "'");
          break;
        case ExprNode::Kind::Call:
          if (!is_builtin(n.name))
            throw SyntaxError(n.span, "unknown function '" + n.name + "'");
          // identifier-like arguments of these builtins are not value names
          for (size_t k = 0; k < n.args.size(); ++k) {
            const ExprNode& a = *n.args[k];
            bool positional_name =
                a.kind == ExprNode::Kind::Name &&
                ((n.name == "chart" && k == 1) || (n.name == "euler_lagrange" && k == 1) ||
                 (n.name == "momentum" && k >= 1) || (n.name == "vary" && k == 1));
            if (positional_name) {
              if (n.name == "vary" && !variation_names_.count(a.name))
                throw SyntaxError(a.span, "unknown variation '" + a.name + "'");
              continue;
            }
            walk(a);
          }
          break;
        case ExprNode::Kind::Deriv:
          walk(*n.lhs);
          for (const auto& c : n.coords)
            if (chart_coord_index(kChartTx, c) < 0 && chart_coord_index(kChartLc, c) < 0)
              throw SyntaxError(n.span, "unknown coordinate '" + c + "'");
          break;
        case ExprNode::Kind::Unary:
          walk(*n.lhs);
          break;
        case ExprNode::Kind::Binary:
        case ExprNode::Kind::Binding:
          walk(*n.lhs);
          walk(*n.rhs);
          break;
        case ExprNode::Kind::Power:
          walk(*n.lhs);
          break;
        case ExprNode::Kind::Number:
          break;
      }
    };

    for (const auto& st : script_.statements) {
      using K = Statement::Kind;
      switch (st.kind) {
        case K::Field:
        case K::Param:
          if (names.count(st.name))
            throw SyntaxError(st.span, "name '" + st.name + "' already bound");
          names.insert(st.name);
          break;
        case K::Assume:
          for (const auto& a : st.atoms) walk(*a);
          break;
        case K::Let:
          walk(*st.expr);
          names.insert(st.name);
          break;
        case K::Variation:
          if (!names.count(st.param_name))
            throw SyntaxError(st.span, "undeclared variation parameter '" + st.param_name + "'");
          for (const auto& [field, delta] : st.deltas) {
            if (!names.count(field))
              throw SyntaxError(st.span, "variation of undeclared field '" + field + "'");
            walk(*delta);
          }
          variation_names_.insert(st.name);
          break;
        default:
          if (st.expr) walk(*st.expr);
          if (st.expr2) walk(*st.expr2);
          break;
      }
    }
  }

  // ---------------------------------------------------------------------
  // Evaluation
  // ---------------------------------------------------------------------

  using Value = detail::Value;

  Expr as_expr(const Value& v, const Span& span, const char* what) const {
    if (const Expr* e = std::get_if<Expr>(&v)) return *e;
    throw SyntaxError(span, std::string(what) + ": expected an expression, got " +
                                detail::value_type_name(v));
  }

  Value eval(const ExprNode& node) {
    auto it = cache_.find(&node);
    if (it != cache_.end()) return it->second;
    Value v = eval_uncached(node);
    cache_.emplace(&node, v);
    return v;
  }
  Value eval(const NodePtr& node) { return eval(*node); }

  Expr eval_expr(const ExprNode& node) { return as_expr(eval(node), node.span, "operand"); }
  Expr eval_expr(const NodePtr& node) { return eval_expr(*node); }

  Value eval_uncached(const ExprNode& n) {
    switch (n.kind) {
      case ExprNode::Kind::Number:
        return Expr::rational(n.number);
      case ExprNode::Kind::Name:
        return eval_name(n);
      case ExprNode::Kind::Unary:
        return eval_neg(eval(n.lhs), n.span);
      case ExprNode::Kind::Binary:
        return eval_binary(n);
      case ExprNode::Kind::Power: {
        Expr base = eval_expr(n.lhs);
        return pow_expr(base, n.exponent, assumptions_);
      }
      case ExprNode::Kind::Call:
        return eval_call(n);
      case ExprNode::Kind::Deriv:
        return eval_deriv(n);
      case ExprNode::Kind::Binding:
        throw SyntaxError(n.span, "binding is only valid inside subst(...)");
    }
    raise(ErrorKind::Internal, "unreachable node kind");
  }

  Value eval_name(const ExprNode& n) {
    auto it = env_.find(n.name);
    if (it != env_.end()) return it->second;
    if (ctx_.find(n.name) != nullptr) return Expr::from_atom(ctx_.atom(n.name));
    if (n.name == "c") return Expr::c_power(2);
    if (n.name == "I") return Expr::imaginary();
    if (n.name == "alpha") return Expr::alpha_unit();
    if (n.name == "gamma0") return gamma_matrix(0);
    if (n.name == "gamma1") return gamma_matrix(1);
    if (n.name == "gamma2") return gamma_matrix(2);
    if (n.name == "gamma5") return gamma5();
    throw SyntaxError(n.span, "unknown identifier '" + n.name + "'");
  }

  Value eval_neg(const Value& v, const Span& span) {
    if (const Expr* e = std::get_if<Expr>(&v)) return neg(*e);
    if (const MatrixExpr* m = std::get_if<MatrixExpr>(&v)) return Expr::integer(-1) * *m;
    if (const Spinor* s = std::get_if<Spinor>(&v)) return Expr::integer(-1) * *s;
    throw SyntaxError(span, "cannot negate this value");
  }

  Value eval_binary(const ExprNode& n) {
    Value a = eval(n.lhs);
    Value b = eval(n.rhs);
    switch (n.op) {
      case '+':
      case '-': {
        bool minus = n.op == '-';
        if (std::holds_alternative<Expr>(a) && std::holds_alternative<Expr>(b))
          return minus ? sub(std::get<Expr>(a), std::get<Expr>(b))
                       : add(std::get<Expr>(a), std::get<Expr>(b));
        if (std::holds_alternative<MatrixExpr>(a) && std::holds_alternative<MatrixExpr>(b))
          return minus ? std::get<MatrixExpr>(a) - std::get<MatrixExpr>(b)
                       : std::get<MatrixExpr>(a) + std::get<MatrixExpr>(b);
        if (std::holds_alternative<Spinor>(a) && std::holds_alternative<Spinor>(b)) {
          Spinor sb = std::get<Spinor>(b);
          if (minus) sb = Expr::integer(-1) * sb;
          return std::get<Spinor>(a) + sb;
        }
        break;
      }
      case '*':
        if (std::holds_alternative<Expr>(a)) {
          const Expr& e = std::get<Expr>(a);
          if (std::holds_alternative<Expr>(b)) return mul(e, std::get<Expr>(b));
          if (std::holds_alternative<MatrixExpr>(b)) return e * std::get<MatrixExpr>(b);
          if (std::holds_alternative<Spinor>(b)) return e * std::get<Spinor>(b);
        }
        if (std::holds_alternative<MatrixExpr>(a)) {
          const MatrixExpr& m = std::get<MatrixExpr>(a);
          if (std::holds_alternative<MatrixExpr>(b)) return m * std::get<MatrixExpr>(b);
          if (std::holds_alternative<Spinor>(b)) return m * std::get<Spinor>(b);
          if (std::holds_alternative<Expr>(b)) return std::get<Expr>(b) * m;
        }
        if (std::holds_alternative<RowSpinor>(a)) {
          const RowSpinor& r = std::get<RowSpinor>(a);
          if (std::holds_alternative<MatrixExpr>(b)) return r * std::get<MatrixExpr>(b);
          if (std::holds_alternative<Spinor>(b)) return r * std::get<Spinor>(b);
        }
        break;
      case '/': {
        Expr ea = as_expr(a, n.span, "division");
        Expr eb = as_expr(b, n.span, "division");
        return mul(ea, pow_expr(eb, Rational(-1), assumptions_));
      }
    }
    throw SyntaxError(n.span, std::string("operator '") + n.op +
                                  "' does not apply to these operand types");
  }

  // (chart, coordinate index) named by a coordinate identifier
  static std::pair<uint8_t, int> coord_ref(const std::string& name, const Span& span) {
    int k = chart_coord_index(kChartTx, name);
    if (k >= 0) return {kChartTx, k};
    k = chart_coord_index(kChartLc, name);
    if (k >= 0) return {kChartLc, k};
    throw SyntaxError(span, "unknown coordinate '" + name + "'");
  }

  Atom node_to_atom(const ExprNode& n) {
    if (n.kind == ExprNode::Kind::Name) return ctx_.atom(n.name);
    if (n.kind == ExprNode::Kind::Deriv && n.lhs->kind == ExprNode::Kind::Name) {
      uint8_t chart = kChartNone;
      int d[2] = {0, 0};
      for (const auto& c : n.coords) {
        auto [ch, idx] = coord_ref(c, n.span);
        if (chart == kChartNone) chart = ch;
        if (chart != ch) throw SyntaxError(n.span, "mixed charts in derivative");
        ++d[idx];
      }
      return ctx_.atom(n.lhs->name, chart, d[0], d[1]);
    }
    throw SyntaxError(n.span, "expected a field name or D[field, coord]");
  }

  Value eval_deriv(const ExprNode& n) {
    // direct atom for a field target
    if (n.lhs->kind == ExprNode::Kind::Name) {
      const SymbolInfo* sym = ctx_.find(n.lhs->name);
      if (sym && sym->kind == SymKind::Field) return Expr::from_atom(node_to_atom(n));
    }
    Value v = eval(n.lhs);
    for (const auto& c : n.coords) {
      auto [chart, idx] = coord_ref(c, n.span);
      if (const Expr* e = std::get_if<Expr>(&v)) {
        v = coord_derive(*e, chart, idx);
      } else if (const Spinor* s = std::get_if<Spinor>(&v)) {
        v = Spinor{coord_derive(s->up, chart, idx), coord_derive(s->dn, chart, idx)};
      } else {
        throw SyntaxError(n.span, "D[...] applies to expressions and spinors");
      }
    }
    return v;
  }

  int int_arg(const ExprNode& call, size_t k) {
    const ExprNode& a = *call.args[k];
    if (a.kind != ExprNode::Kind::Number || !is_integer(a.number))
      throw SyntaxError(a.span, call.name + ": expected an integer literal argument");
    return static_cast<int>(num(a.number));
  }

  void need_args(const ExprNode& n, size_t count) {
    if (n.args.size() != count)
      throw SyntaxError(n.span, n.name + ": expected " + std::to_string(count) + " arguments, got " +
                                    std::to_string(n.args.size()));
  }

  Value eval_call(const ExprNode& n) {
    const std::string& f = n.name;
    if (f == "sqrt") {
      need_args(n, 1);
      return pow_expr(eval_expr(n.args[0]), Rational(1, 2), assumptions_);
    }
    if (f == "chart") {
      need_args(n, 2);
      if (n.args[1]->kind != ExprNode::Kind::Name)
        throw SyntaxError(n.args[1]->span, "chart: second argument must be tx or lc");
      const std::string& target = n.args[1]->name;
      uint8_t chart = target == "tx" ? kChartTx : target == "lc" ? kChartLc : kChartNone;
      if (chart == kChartNone)
        throw SyntaxError(n.args[1]->span, "chart: second argument must be tx or lc");
      return change_chart(eval_expr(n.args[0]), chart, assumptions_);
    }
    if (f == "subst") {
      if (n.args.size() < 2) throw SyntaxError(n.span, "subst: needs a target and bindings");
      Expr e = eval_expr(n.args[0]);
      std::map<uint32_t, Expr> field_bindings;
      std::vector<std::pair<Atom, Expr>> atom_bindings;
      for (size_t k = 1; k < n.args.size(); ++k) {
        const ExprNode& b = *n.args[k];
        if (b.kind != ExprNode::Kind::Binding)
          throw SyntaxError(b.span, "subst: arguments after the first must be bindings");
        Expr rep = eval_expr(b.rhs);
        if (b.lhs->kind == ExprNode::Kind::Name) {
          const SymbolInfo& sym = ctx_.require(b.lhs->name);
          field_bindings.emplace(sym.id, rep);
        } else {
          atom_bindings.emplace_back(node_to_atom(*b.lhs), rep);
        }
      }
      if (!field_bindings.empty()) e = substitute(e, field_bindings, assumptions_);
      for (const auto& [atom, rep] : atom_bindings) e = subst_atom(e, atom, rep, assumptions_);
      return e;
    }
    if (f == "limit_c") {
      need_args(n, 1);
      return c_limit(eval_expr(n.args[0]), assumptions_, options_.order_twice);
    }
    if (f == "vary") {
      need_args(n, 2);
      if (n.args[1]->kind != ExprNode::Kind::Name)
        throw SyntaxError(n.args[1]->span, "vary: second argument must be a variation name");
      auto it = variations_.find(n.args[1]->name);
      if (it == variations_.end())
        throw SyntaxError(n.args[1]->span, "unknown variation '" + n.args[1]->name + "'");
      return apply_variation(eval_expr(n.args[0]), it->second, assumptions_);
    }
    if (f == "Lop") {
      need_args(n, 1);
      return lorentz_op(eval_expr(n.args[0]), ctx_, assumptions_);
    }
    if (f == "euler_lagrange") {
      need_args(n, 2);
      if (n.args[1]->kind != ExprNode::Kind::Name)
        throw SyntaxError(n.args[1]->span, "euler_lagrange: second argument must be a field");
      Expr L = eval_expr(n.args[0]);
      const SymbolInfo& sym = ctx_.require(n.args[1]->name);
      uint8_t chart = L.chart() == kChartNone ? sym.chart : L.chart();
      return euler_lagrange(L, sym.id, chart, assumptions_);
    }
    if (f == "pd") {
      need_args(n, 2);
      return partial_atom(eval_expr(n.args[0]), node_to_atom(*n.args[1]), assumptions_);
    }
    if (f == "momentum") {
      need_args(n, 3);
      if (n.args[1]->kind != ExprNode::Kind::Name || n.args[2]->kind != ExprNode::Kind::Name)
        throw SyntaxError(n.span, "momentum: expected momentum(L, field, coord)");
      auto [chart, idx] = coord_ref(n.args[2]->name, n.args[2]->span);
      Atom vel = ctx_.atom(n.args[1]->name, chart, idx == 0 ? 1 : 0, idx == 1 ? 1 : 0);
      return partial_atom(eval_expr(n.args[0]), vel, assumptions_);
    }
    if (f == "legendre") {
      need_args(n, 4);
      Expr L = eval_expr(n.args[0]);
      Expr pi = eval_expr(n.args[1]);
      Atom vel = node_to_atom(*n.args[2]);
      Expr sol = eval_expr(n.args[3]);
      return sub(mul(pi, sol), subst_atom(L, vel, sol, assumptions_));
    }
    if (f == "det") {
      need_args(n, 1);
      return det_g(std::get<MatrixExpr>(require_kind<MatrixExpr>(n, 0, "matrix")));
    }
    if (f == "metric") {
      need_args(n, 2);
      return induced_metric(
          std::get<Parameterization>(require_kind<Parameterization>(n, 0, "parameterization")),
          std::get<Spinor>(require_kind<Spinor>(n, 1, "spinor")));
    }
    if (f == "wz") {
      need_args(n, 2);
      return wz_term(
          std::get<Parameterization>(require_kind<Parameterization>(n, 0, "parameterization")),
          std::get<Spinor>(require_kind<Spinor>(n, 1, "spinor")));
    }
    if (f == "induced") {
      need_args(n, 4);
      auto P = std::get<Parameterization>(require_kind<Parameterization>(n, 0, "parameterization"));
      auto s = std::get<Spinor>(require_kind<Spinor>(n, 1, "spinor"));
      int mu = int_arg(n, 2);
      int i = int_arg(n, 3);
      if (mu < 0 || mu > 2 || i < 0 || i > 1)
        throw SyntaxError(n.span, "induced: indices out of range");
      return induced_vector(P, s, i)[mu];
    }
    if (f == "gauge") {
      need_args(n, 1);
      return gauge_project(std::get<Spinor>(require_kind<Spinor>(n, 0, "spinor")));
    }
    if (f == "spinor") {
      need_args(n, 2);
      return Spinor{eval_expr(n.args[0]), eval_expr(n.args[1])};
    }
    if (f == "frame") {
      need_args(n, 3);
      return Parameterization{
          {eval_expr(n.args[0]), eval_expr(n.args[1]), eval_expr(n.args[2])}};
    }
    if (f == "bar") {
      need_args(n, 1);
      return bar(std::get<Spinor>(require_kind<Spinor>(n, 0, "spinor")));
    }
    if (f == "entry") {
      need_args(n, 3);
      auto m = std::get<MatrixExpr>(require_kind<MatrixExpr>(n, 0, "matrix"));
      int i = int_arg(n, 1);
      int j = int_arg(n, 2);
      if (i < 0 || i > 1 || j < 0 || j > 1)
        throw SyntaxError(n.span, "entry: indices out of range");
      return m.at(i, j);
    }
    if (f == "wd") {
      need_args(n, 2);
      int i = int_arg(n, 1);
      if (i < 0 || i > 1) throw SyntaxError(n.span, "wd: index out of range");
      Value v = eval(n.args[0]);
      if (const Expr* e = std::get_if<Expr>(&v)) return worldsheet_derive(*e, i);
      if (const Spinor* s = std::get_if<Spinor>(&v)) return worldsheet_derive(*s, i);
      throw SyntaxError(n.span, "wd: applies to expressions and spinors");
    }
    throw SyntaxError(n.span, "unknown function '" + f + "'");
  }

  template <typename T>
  Value require_kind(const ExprNode& call, size_t k, const char* what) {
    Value v = eval(call.args[k]);
    if (!std::holds_alternative<T>(v))
      throw SyntaxError(call.args[k]->span,
                        call.name + ": expected a " + what + ", got " +
                            detail::value_type_name(v));
    return v;
  }

  // ---------------------------------------------------------------------
  // Statement execution
  // ---------------------------------------------------------------------

  void execute(const Statement& st, RunReport& report) {
    using K = Statement::Kind;
    switch (st.kind) {
      case K::Field:
        ctx_.declare_field(st.name, st.parity == "odd" ? Parity::Odd : Parity::Even,
                           st.chart == "lc" ? kChartLc : kChartTx);
        return;
      case K::Param:
        ctx_.declare_param(st.name, st.parity == "odd" ? Parity::Odd : Parity::Even,
                           st.parity == "marker");
        return;
      case K::Assume:
        for (const auto& a : st.atoms) assumptions_.declare_positive(node_to_atom(*a));
        return;
      case K::Let:
        env_.insert_or_assign(st.name, eval(st.expr));
        return;
      case K::Variation: {
        Atom param = ctx_.atom(st.param_name);
        std::vector<std::pair<Atom, Expr>> deltas;
        for (const auto& [field, delta] : st.deltas)
          deltas.emplace_back(ctx_.atom(field), eval_expr(delta));
        variations_.insert_or_assign(st.name, make_variation(param, deltas));
        return;
      }
      default:
        run_assert(st, report);
        return;
    }
  }

  void run_assert(const Statement& st, RunReport& report) {
    auto start = std::chrono::steady_clock::now();
    AssertionRecord rec;
    rec.id = next_id_++;
    rec.kind = assert_kind_name(st.kind);
    rec.label = st.label.empty() ? describe_statement(st) : st.label;

    using K = Statement::Kind;
    switch (st.kind) {
      case K::AssertZero: {
        Expr e = canonicalize(eval_expr(st.expr), assumptions_);
        bool zero = equals(e, Expr::zero(), assumptions_);
        rec.residual = zero ? "0" : expr_str(e);
        rec.status = zero ? "pass" : "fail";
        if (options_.oracle) run_oracle_zero(st.expr, nullptr, rec, zero);
        break;
      }
      case K::AssertEq: {
        Expr lhs = eval_expr(st.expr);
        Expr rhs = eval_expr(st.expr2);
        bool equal = equals(lhs, rhs, assumptions_);
        rec.residual = equal ? "0" : expr_str(canonicalize(sub(lhs, rhs), assumptions_));
        rec.status = equal ? "pass" : "fail";
        if (options_.oracle) run_oracle_zero(st.expr, st.expr2.get(), rec, equal);
        break;
      }
      case K::AssertNonzero: {
        Expr e = canonicalize(eval_expr(st.expr), assumptions_);
        rec.residual = expr_str(e);
        rec.status = e.is_zero() ? "fail" : "pass";
        if (options_.oracle && !e.is_zero()) {
          // confirmation: look for a nonzero evaluation
          OracleReport orep = oracle_equiv(e, Expr::zero(), options_.trials,
                                           options_.seed * 10007 + rec.id, assumptions_);
          rec.oracle.checked = true;
          rec.oracle.trials = orep.trials;
          rec.oracle.equivalent = orep.equivalent;  // equivalent-to-zero means suspicious
          rec.oracle.witness = orep.witness;
          if (orep.equivalent) rec.detail = "oracle found no nonzero evaluation";
        }
        break;
      }
      case K::AssertTotalDerivative: {
        Expr r = canonicalize(eval_expr(st.expr), assumptions_);
        uint8_t chart = r.chart() == kChartNone ? kChartTx : r.chart();
        if (r.is_zero()) {
          rec.tier = "exact_zero";
          rec.status = "pass";
          rec.residual = "0";
        } else {
          TotalDerivativeMatch m = total_derivative_match(r, chart, assumptions_);
          rec.residual = expr_str(r);
          if (m.matched) {
            rec.tier = "total_derivative";
            rec.status = "pass";
            rec.detail = "X = " + expr_str(m.X) + "; Y = " + expr_str(m.Y);
            if (options_.oracle) {
              Expr recombined = add(coord_derive(m.X, chart, 0), coord_derive(m.Y, chart, 1));
              OracleReport orep = oracle_equiv(r, recombined, options_.trials,
                                               options_.seed * 10007 + rec.id, assumptions_);
              rec.oracle.checked = true;
              rec.oracle.trials = orep.trials;
              rec.oracle.equivalent = orep.equivalent;
              rec.oracle.witness = orep.witness;
              if (!orep.equivalent) rec.status = "fail";
            }
          } else {
            rec.tier = "none";
            rec.status = "fail";
            rec.detail = "no match in ansatz";
          }
        }
        break;
      }
      case K::AssertScalarMultiple: {
        Expr e = canonicalize(eval_expr(st.expr), assumptions_);
        Atom target = node_to_atom(*st.expr2);
        bool ok = is_scalar_multiple_of_atom(e, target);
        rec.residual = expr_str(e);
        rec.status = ok ? "pass" : "fail";
        if (!ok) rec.detail = "not of the form (scalar) * " + atom_str(target);
        break;
      }
      case K::AssertPauli: {
        PauliReport prep = pauli_identity_check(st.pauli_variant == "pauli123"
                                                    ? PauliVariant::Pauli123
                                                    : PauliVariant::Literal012);
        std::string detail;
        for (const auto& t : prep.tuples) {
          detail += "(" + std::to_string(t.i) + std::to_string(t.j) + std::to_string(t.k) +
                    std::to_string(t.l) + "): lhs=" + coeff_str(t.lhs) +
                    " rhs=" + coeff_str(t.rhs) + (t.holds ? " ok" : " FAILS") + "; ";
        }
        rec.detail = detail;
        if (st.pauli_holds) {
          rec.status = prep.all_hold ? "pass" : "fail";
        } else {
          bool found = false;
          for (const auto& t : prep.tuples) {
            if (t.i == st.pauli_tuple[0] && t.j == st.pauli_tuple[1] &&
                t.k == st.pauli_tuple[2] && t.l == st.pauli_tuple[3]) {
              found = !t.holds && t.lhs == Coeff(st.pauli_lhs) && t.rhs == Coeff(st.pauli_rhs);
            }
          }
          rec.status = (!prep.all_hold && found) ? "pass" : "fail";
        }
        rec.residual = prep.all_hold ? "0" : "identity violated";
        break;
      }
      default:
        raise(ErrorKind::Internal, "not an assertion");
    }
    rec.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    report.records.push_back(rec);
    emit(report.records.back());
  }

  // ---------------------------------------------------------------------
  // Oracle cross-checks: the assertion trees are re-evaluated numerically,
  // with ring operations recombined in the Grassmann algebra and engine
  // calls evaluated from their canonical results.
  // ---------------------------------------------------------------------

  void collect_deep(const ExprNode& n, std::set<std::pair<std::string, Atom>>& atoms) {
    switch (n.kind) {
      case ExprNode::Kind::Number:
        return;
      case ExprNode::Kind::Unary:
      case ExprNode::Kind::Power:
        if (expr_valued(*n.lhs)) {
          collect_deep(*n.lhs, atoms);
          return;
        }
        break;
      case ExprNode::Kind::Binary:
        if (expr_valued(*n.lhs) && expr_valued(*n.rhs)) {
          collect_deep(*n.lhs, atoms);
          collect_deep(*n.rhs, atoms);
          return;
        }
        break;
      case ExprNode::Kind::Call:
        if (n.name == "sqrt") {
          collect_deep(*n.args[0], atoms);
          return;
        }
        break;
      default:
        break;
    }
    Value v = eval(n);
    if (const Expr* e = std::get_if<Expr>(&v)) collect_atoms(*e, atoms);
  }

  bool expr_valued(const ExprNode& n) {
    return std::holds_alternative<Expr>(eval(n));
  }

  GrassElem eval_numeric(const ExprNode& n, const Assignment& a) {
    OracleCtx octx{a.c_value};
    // Subtrees built from matrix or spinor values recombine to expressions
    // only at the top; evaluate those from their canonical result.
    auto ring_children = [&]() {
      switch (n.kind) {
        case ExprNode::Kind::Unary:
        case ExprNode::Kind::Power:
          return expr_valued(*n.lhs);
        case ExprNode::Kind::Binary:
          return expr_valued(*n.lhs) && expr_valued(*n.rhs);
        default:
          return true;
      }
    };
    if (!ring_children()) {
      Value v = eval(n);
      const Expr* e = std::get_if<Expr>(&v);
      if (!e) raise(ErrorKind::Internal, "oracle: non-expression in numeric context");
      return oracle_eval(*e, a);
    }
    switch (n.kind) {
      case ExprNode::Kind::Number:
        return GrassElem::rational(n.number);
      case ExprNode::Kind::Unary:
        return -eval_numeric(*n.lhs, a);
      case ExprNode::Kind::Binary: {
        GrassElem x = eval_numeric(*n.lhs, a);
        GrassElem y = eval_numeric(*n.rhs, a);
        switch (n.op) {
          case '+': return x + y;
          case '-': return x - y;
          case '*': return elem_mul(x, y, octx);
          case '/': return elem_mul(x, elem_pow(y, Rational(-1), octx), octx);
        }
        raise(ErrorKind::Internal, "bad operator");
      }

      case ExprNode::Kind::Power:
        return elem_pow(eval_numeric(*n.lhs, a), n.exponent, octx);
      case ExprNode::Kind::Call:
        if (n.name == "sqrt")
          return elem_pow(eval_numeric(*n.args[0], a), Rational(1, 2), octx);
        [[fallthrough]];
      default: {
        Value v = eval(n);
        const Expr* e = std::get_if<Expr>(&v);
        if (!e) raise(ErrorKind::Internal, "oracle: non-expression in numeric context");
        return oracle_eval(*e, a);
      }
    }
  }

  void run_oracle_zero(const NodePtr& lhs, const ExprNode* rhs, AssertionRecord& rec,
                       bool symbolically_true) {
    std::set<std::pair<std::string, Atom>> atoms;
    collect_deep(*lhs, atoms);
    if (rhs) collect_deep(*rhs, atoms);
    rec.oracle.checked = true;
    for (int t = 0; t < options_.trials; ++t) {
      std::mt19937_64 rng((options_.seed * 10007 + rec.id) * 1000003ULL +
                          static_cast<uint64_t>(t) * 7919ULL + 17ULL);
      bool ok = false;
      Assignment assign;
      GrassElem diff;
      for (int attempt = 0; attempt < 2000 && !ok; ++attempt) {
        assign = random_assignment(atoms, assumptions_, rng);
        try {
          GrassElem va = eval_numeric(*lhs, assign);
          GrassElem vb = rhs ? eval_numeric(*rhs, assign) : GrassElem{};
          diff = va - vb;
          ok = true;
        } catch (const EngineError& err) {
          if (err.kind() != ErrorKind::NegativeBase && err.kind() != ErrorKind::ZeroDivision)
            throw;
        }
      }
      if (!ok)
        raise(ErrorKind::NegativeBase, "oracle could not find an admissible assignment");
      ++rec.oracle.trials;
      if (!diff.is_zero()) {
        rec.oracle.equivalent = false;
        rec.oracle.witness = assign.describe();
        rec.status = "fail";
        return;
      }
    }
    rec.oracle.equivalent = true;
    if (!symbolically_true) rec.status = "unproven";
  }

  void emit(const AssertionRecord& rec) {
    if (!human_) return;
    std::string tag = rec.status == "pass"       ? "[PASS]"
                      : rec.status == "fail"     ? "[FAIL]"
                      : rec.status == "unproven" ? "[UNPROVEN]"
                                                 : "[ERROR]";
    *human_ << tag << " " << rec.label;
    if (!rec.tier.empty()) *human_ << " (tier: " << rec.tier << ")";
    if (rec.status == "fail" && !rec.residual.empty())
      *human_ << "  residual: " << rec.residual;
    if (rec.status == "error") *human_ << "  " << rec.detail;
    if (rec.oracle.checked && !rec.oracle.equivalent && !rec.oracle.witness.empty())
      *human_ << "  witness: " << rec.oracle.witness;
    *human_ << "\n";
  }

  const Script& script_;
  RunOptions options_;
  std::ostream* human_;

  Context ctx_;
  Assumptions assumptions_;
  std::map<std::string, Value> env_;
  std::map<std::string, Variation> variations_;
  std::set<std::string> variation_names_;  // for bind checking
  std::map<const ExprNode*, Value> cache_;
  int next_id_ = 1;
};

inline RunReport run_script(const Script& script, const RunOptions& options,
                            std::ostream* human = nullptr) {
  return Interp(script, options, human).run();
}

}  // namespace gft::script
