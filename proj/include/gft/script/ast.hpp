#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gft/rational.hpp"

namespace gft::script {

struct Span {
  int line = 0, col = 0;
};

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

// Expression tree as written in the script; evaluation happens in the
// interpreter, numeric cross-checks re-walk the same tree.
struct ExprNode {
  enum class Kind { Number, Name, Unary, Binary, Power, Call, Deriv, Binding };

  Kind kind = Kind::Number;
  Span span;

  Rational number{0};             // Number
  std::string name;               // Name, Call (callee)
  char op = 0;                    // Binary: + - * /
  NodePtr lhs, rhs;               // Unary (lhs), Binary, Binding
  Rational exponent{1};           // Power (base in lhs)
  std::vector<NodePtr> args;      // Call
  std::vector<std::string> coords;  // Deriv (target in lhs)
};

struct Statement {
  enum class Kind {
    Field,
    Param,
    Assume,
    Let,
    Variation,
    AssertZero,
    AssertNonzero,
    AssertEq,
    AssertTotalDerivative,
    AssertScalarMultiple,
    AssertPauli,
  };

  Kind kind = Kind::Let;
  Span span;

  std::string name;    // field/param/let/variation name
  std::string parity;  // "even" | "odd" | "marker"
  std::string chart;   // "tx" | "lc"

  std::vector<NodePtr> atoms;  // assume positive ...

  NodePtr expr, expr2;  // let / assert operands
  std::string label;

  std::string param_name;  // variation parameter
  std::string param_kind;  // "odd" | "marker"
  std::vector<std::pair<std::string, NodePtr>> deltas;

  // assert_pauli
  std::string pauli_variant;  // "pauli123" | "literal012"
  bool pauli_holds = true;
  int pauli_tuple[4] = {0, 0, 0, 0};
  Rational pauli_lhs{0}, pauli_rhs{0};
};

struct Script {
  std::string name;
  std::vector<Statement> statements;
};

// ---------------------------------------------------------------------------
// Deterministic renderer; parse(render(s)) reproduces the same tree, making
// render-parse-render a fixed point.
// ---------------------------------------------------------------------------

namespace detail {

inline int precedence(const ExprNode& n) {
  switch (n.kind) {
    case ExprNode::Kind::Binary: return (n.op == '+' || n.op == '-') ? 1 : 2;
    case ExprNode::Kind::Unary: return 3;
    case ExprNode::Kind::Power: return 4;
    default: return 5;
  }
}

std::string render_expr(const ExprNode& n);

inline std::string render_child(const ExprNode& child, int parent_prec, bool tight) {
  std::string s = render_expr(child);
  if (precedence(child) < parent_prec || (tight && precedence(child) == parent_prec))
    return "(" + s + ")";
  return s;
}

inline std::string render_expr(const ExprNode& n) {
  switch (n.kind) {
    case ExprNode::Kind::Number:
      if (is_integer(n.number)) return num(n.number).str();
      return num(n.number).str() + "/" + den(n.number).str();
    case ExprNode::Kind::Name:
      return n.name;
    case ExprNode::Kind::Unary:
      return "-" + render_child(*n.lhs, 3, false);
    case ExprNode::Kind::Binary: {
      int prec = precedence(n);
      // - and / do not associate to the right
      return render_child(*n.lhs, prec, false) + " " + std::string(1, n.op) + " " +
             render_child(*n.rhs, prec, n.op == '-' || n.op == '/');
    }
    case ExprNode::Kind::Power: {
      std::string e = is_integer(n.exponent) && n.exponent > 0
                          ? num(n.exponent).str()
                          : "(" + rational_str(n.exponent) + ")";
      return render_child(*n.lhs, 5, false) + "^" + e;
    }
    case ExprNode::Kind::Call: {
      std::string out = n.name + "(";
      for (size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        out += render_expr(*n.args[i]);
      }
      return out + ")";
    }
    case ExprNode::Kind::Deriv: {
      std::string out = "D[" + render_expr(*n.lhs);
      for (const auto& c : n.coords) out += ", " + c;
      return out + "]";
    }
    case ExprNode::Kind::Binding:
      return render_expr(*n.lhs) + " = " + render_expr(*n.rhs);
  }
  return "";
}

}  // namespace detail

inline std::string render_statement(const Statement& s) {
  using K = Statement::Kind;
  auto label_suffix = [&]() {
    return s.label.empty() ? std::string(";") : " : \"" + s.label + "\";";
  };
  switch (s.kind) {
    case K::Field:
      return "field " + s.name + " : " + s.parity + " on " + s.chart + ";";
    case K::Param:
      return "param " + s.name + " : " + s.parity + ";";
    case K::Assume: {
      std::string out = "assume positive ";
      for (size_t i = 0; i < s.atoms.size(); ++i) {
        if (i) out += ", ";
        out += detail::render_expr(*s.atoms[i]);
      }
      return out + ";";
    }
    case K::Let:
      return "let " + s.name + " = " + detail::render_expr(*s.expr) + ";";
    case K::Variation: {
      std::string out = "variation " + s.name + " with " + s.param_kind + " " + s.param_name + " {";
      for (const auto& [field, delta] : s.deltas)
        out += " " + field + ": " + detail::render_expr(*delta) + ";";
      return out + " }";
    }
    case K::AssertZero:
      return "assert_zero " + detail::render_expr(*s.expr) + label_suffix();
    case K::AssertNonzero:
      return "assert_nonzero " + detail::render_expr(*s.expr) + label_suffix();
    case K::AssertEq:
      return "assert_eq " + detail::render_expr(*s.expr) + ", " + detail::render_expr(*s.expr2) +
             label_suffix();
    case K::AssertTotalDerivative:
      return "assert_matches_total_derivative " + detail::render_expr(*s.expr) + label_suffix();
    case K::AssertScalarMultiple:
      return "assert_scalar_multiple " + detail::render_expr(*s.expr) + ", " +
             detail::render_expr(*s.expr2) + label_suffix();
    case K::AssertPauli: {
      std::string out = "assert_pauli " + s.pauli_variant;
      if (s.pauli_holds) {
        out += " holds";
      } else {
        out += " fails_at (" + std::to_string(s.pauli_tuple[0]) + ", " +
               std::to_string(s.pauli_tuple[1]) + ", " + std::to_string(s.pauli_tuple[2]) + ", " +
               std::to_string(s.pauli_tuple[3]) + ") lhs " + rational_str(s.pauli_lhs) + " rhs " +
               rational_str(s.pauli_rhs);
      }
      return out + label_suffix();
    }
  }
  return ";";
}

inline std::string render_script(const Script& s) {
  std::string out;
  for (const auto& st : s.statements) out += render_statement(st) + "\n";
  return out;
}

}  // namespace gft::script
