#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gft/script/lexer.hpp"

namespace gft::script {

// Recursive-descent parser with precedence climbing for the infix layer.
class Parser {
 public:
  explicit Parser(const std::string& text, std::string script_name = "")
      : tokens_(tokenize(text)), name_(std::move(script_name)) {}

  Script parse() {
    Script s;
    s.name = name_;
    while (!at_end()) s.statements.push_back(parse_statement());
    return s;
  }

 private:
  const Token& peek(int ahead = 0) const {
    size_t k = pos_ + ahead;
    return k < tokens_.size() ? tokens_[k] : tokens_.back();
  }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  Token take() { return tokens_[pos_++]; }

  bool is_punct(const char* p, int ahead = 0) const {
    return peek(ahead).kind == Token::Kind::Punct && peek(ahead).text == p;
  }
  bool is_ident(const char* w, int ahead = 0) const {
    return peek(ahead).kind == Token::Kind::Ident && peek(ahead).text == w;
  }

  Token expect_punct(const char* p) {
    if (!is_punct(p))
      throw SyntaxError(peek().span, "expected '" + std::string(p) + "', found '" +
                                         describe(peek()) + "'");
    return take();
  }
  Token expect_ident() {
    if (peek().kind != Token::Kind::Ident)
      throw SyntaxError(peek().span, "expected identifier, found '" + describe(peek()) + "'");
    return take();
  }
  Token expect_keyword(const char* w) {
    if (!is_ident(w))
      throw SyntaxError(peek().span, "expected '" + std::string(w) + "', found '" +
                                         describe(peek()) + "'");
    return take();
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Token::Kind::End: return "<end of script>";
      case Token::Kind::String: return "\"" + t.text + "\"";
      default: return t.text;
    }
  }

  // ---- statements ----

  Statement parse_statement() {
    const Token& head = peek();
    if (head.kind != Token::Kind::Ident)
      throw SyntaxError(head.span, "expected a statement keyword, found '" + describe(head) + "'");
    const std::string& w = head.text;
    if (w == "field") return parse_field();
    if (w == "param") return parse_param();
    if (w == "assume") return parse_assume();
    if (w == "let") return parse_let();
    if (w == "variation") return parse_variation();
    if (w == "assert_zero") return parse_assert(Statement::Kind::AssertZero, 1);
    if (w == "assert_nonzero") return parse_assert(Statement::Kind::AssertNonzero, 1);
    if (w == "assert_eq") return parse_assert(Statement::Kind::AssertEq, 2);
    if (w == "assert_matches_total_derivative")
      return parse_assert(Statement::Kind::AssertTotalDerivative, 1);
    if (w == "assert_scalar_multiple")
      return parse_assert(Statement::Kind::AssertScalarMultiple, 2);
    if (w == "assert_pauli") return parse_assert_pauli();
    throw SyntaxError(head.span,
                      "unknown statement '" + w +
                          "' (expected field, param, assume, let, variation or assert_*)");
  }

  Statement parse_field() {
    Statement s;
    s.kind = Statement::Kind::Field;
    s.span = take().span;
    s.name = expect_ident().text;
    expect_punct(":");
    Token parity = expect_ident();
    if (parity.text != "even" && parity.text != "odd")
      throw SyntaxError(parity.span, "field parity must be 'even' or 'odd'");
    s.parity = parity.text;
    expect_keyword("on");
    Token chart = expect_ident();
    if (chart.text != "tx" && chart.text != "lc")
      throw SyntaxError(chart.span, "chart must be 'tx' or 'lc'");
    s.chart = chart.text;
    expect_punct(";");
    return s;
  }

  Statement parse_param() {
    Statement s;
    s.kind = Statement::Kind::Param;
    s.span = take().span;
    s.name = expect_ident().text;
    expect_punct(":");
    Token parity = expect_ident();
    if (parity.text != "even" && parity.text != "odd" && parity.text != "marker")
      throw SyntaxError(parity.span, "parameter kind must be 'even', 'odd' or 'marker'");
    s.parity = parity.text;
    expect_punct(";");
    return s;
  }

  Statement parse_assume() {
    Statement s;
    s.kind = Statement::Kind::Assume;
    s.span = take().span;
    expect_keyword("positive");
    while (true) {
      s.atoms.push_back(parse_atom_ref());
      if (is_punct(",")) {
        take();
        continue;
      }
      break;
    }
    expect_punct(";");
    return s;
  }

  Statement parse_let() {
    Statement s;
    s.kind = Statement::Kind::Let;
    s.span = take().span;
    s.name = expect_ident().text;
    expect_punct("=");
    s.expr = parse_expr();
    expect_punct(";");
    return s;
  }

  Statement parse_variation() {
    Statement s;
    s.kind = Statement::Kind::Variation;
    s.span = take().span;
    s.name = expect_ident().text;
    expect_keyword("with");
    Token kind = expect_ident();
    if (kind.text != "odd" && kind.text != "marker")
      throw SyntaxError(kind.span, "variation parameter must be 'odd' or 'marker'");
    s.param_kind = kind.text;
    s.param_name = expect_ident().text;
    expect_punct("{");
    while (!is_punct("}")) {
      std::string field = expect_ident().text;
      expect_punct(":");
      NodePtr delta = parse_expr();
      expect_punct(";");
      s.deltas.emplace_back(field, delta);
    }
    expect_punct("}");
    return s;
  }

  Statement parse_assert(Statement::Kind kind, int arity) {
    Statement s;
    s.kind = kind;
    s.span = take().span;
    s.expr = parse_expr();
    if (arity == 2) {
      expect_punct(",");
      s.expr2 = parse_expr();
    }
    parse_label(s);
    return s;
  }

  Statement parse_assert_pauli() {
    Statement s;
    s.kind = Statement::Kind::AssertPauli;
    s.span = take().span;
    Token variant = expect_ident();
    if (variant.text != "pauli123" && variant.text != "literal012")
      throw SyntaxError(variant.span, "pauli variant must be 'pauli123' or 'literal012'");
    s.pauli_variant = variant.text;
    Token mode = expect_ident();
    if (mode.text == "holds") {
      s.pauli_holds = true;
    } else if (mode.text == "fails_at") {
      s.pauli_holds = false;
      expect_punct("(");
      for (int k = 0; k < 4; ++k) {
        if (k) expect_punct(",");
        s.pauli_tuple[k] = static_cast<int>(parse_signed_integer());
      }
      expect_punct(")");
      expect_keyword("lhs");
      s.pauli_lhs = parse_signed_rational();
      expect_keyword("rhs");
      s.pauli_rhs = parse_signed_rational();
    } else {
      throw SyntaxError(mode.span, "expected 'holds' or 'fails_at'");
    }
    parse_label(s);
    return s;
  }

  void parse_label(Statement& s) {
    if (is_punct(":")) {
      take();
      if (peek().kind != Token::Kind::String)
        throw SyntaxError(peek().span, "expected a string label after ':'");
      s.label = take().text;
    }
    expect_punct(";");
  }

  long long parse_signed_integer() {
    bool negative = false;
    if (is_punct("-")) {
      take();
      negative = true;
    }
    if (peek().kind != Token::Kind::Number)
      throw SyntaxError(peek().span, "expected an integer");
    long long v = integer_value(take());
    return negative ? -v : v;
  }

  static long long integer_value(const Token& t) {
    if (t.text.size() > 18) throw SyntaxError(t.span, "integer literal too large");
    return std::stoll(t.text);
  }

  Rational parse_signed_rational() {
    long long n = parse_signed_integer();
    if (is_punct("/")) {
      take();
      if (peek().kind != Token::Kind::Number)
        throw SyntaxError(peek().span, "expected a denominator");
      long long d = integer_value(take());
      if (d == 0) throw SyntaxError(peek().span, "zero denominator");
      return Rational(n, d);
    }
    return Rational(n);
  }

  // atom reference: IDENT or D[IDENT, coord...]
  NodePtr parse_atom_ref() {
    if (is_ident("D") && is_punct("[", 1)) return parse_deriv();
    Token t = expect_ident();
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Name;
    n->span = t.span;
    n->name = t.text;
    return n;
  }

  // ---- expressions ----

  NodePtr parse_expr() { return parse_binary(1); }

  NodePtr parse_binary(int min_prec) {
    NodePtr lhs = parse_unary();
    while (peek().kind == Token::Kind::Punct) {
      char op = peek().text.size() == 1 ? peek().text[0] : 0;
      int prec = (op == '+' || op == '-') ? 1 : (op == '*' || op == '/') ? 2 : 0;
      if (prec == 0 || prec < min_prec) break;
      Span sp = take().span;
      NodePtr rhs = parse_binary(prec + 1);
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::Binary;
      n->span = sp;
      n->op = op;
      n->lhs = lhs;
      n->rhs = rhs;
      lhs = n;
    }
    return lhs;
  }

  NodePtr parse_unary() {
    if (is_punct("-")) {
      Span sp = take().span;
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::Unary;
      n->span = sp;
      n->lhs = parse_unary();
      return n;
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (is_punct("^")) {
      Span sp = take().span;
      Rational e = parse_exponent();
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::Power;
      n->span = sp;
      n->lhs = base;
      n->exponent = e;
      return n;
    }
    return base;
  }

  Rational parse_exponent() {
    if (is_punct("(")) {
      take();
      Rational r = parse_signed_rational();
      expect_punct(")");
      return r;
    }
    if (peek().kind == Token::Kind::Number) return Rational(integer_value(take()));
    if (is_punct("-")) return parse_signed_rational();
    throw SyntaxError(peek().span, "expected an exponent (integer or (p/q))");
  }

  NodePtr parse_deriv() {
    Span sp = take().span;  // D
    expect_punct("[");
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Deriv;
    n->span = sp;
    n->lhs = parse_expr();
    do {
      expect_punct(",");
      n->coords.push_back(expect_ident().text);
    } while (is_punct(","));
    expect_punct("]");
    if (n->coords.empty()) throw SyntaxError(sp, "D[...] needs at least one coordinate");
    return n;
  }

  NodePtr parse_primary() {
    const Token& t = peek();
    if (t.kind == Token::Kind::Number) {
      Token tok = take();
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::Number;
      n->span = tok.span;
      n->number = Rational(integer_value(tok));
      return n;
    }
    if (t.kind == Token::Kind::Ident) {
      if (t.text == "D" && is_punct("[", 1)) return parse_deriv();
      Token tok = take();
      if (is_punct("(")) {
        take();
        auto n = std::make_shared<ExprNode>();
        n->kind = ExprNode::Kind::Call;
        n->span = tok.span;
        n->name = tok.text;
        if (!is_punct(")")) {
          while (true) {
            n->args.push_back(parse_call_arg());
            if (is_punct(",")) {
              take();
              continue;
            }
            break;
          }
        }
        expect_punct(")");
        return n;
      }
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::Name;
      n->span = tok.span;
      n->name = tok.text;
      return n;
    }
    if (is_punct("(")) {
      take();
      NodePtr inner = parse_expr();
      expect_punct(")");
      return inner;
    }
    throw SyntaxError(t.span, "expected a number, identifier, call or '(', found '" +
                                  describe(t) + "'");
  }

  // call arguments may be bindings: name = expr or D[f, coord] = expr
  NodePtr parse_call_arg() {
    NodePtr first = parse_expr();
    if (is_punct("=")) {
      Span sp = take().span;
      if (first->kind != ExprNode::Kind::Name && first->kind != ExprNode::Kind::Deriv)
        throw SyntaxError(sp, "binding target must be a field name or D[field, coord]");
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::Binding;
      n->span = sp;
      n->lhs = first;
      n->rhs = parse_expr();
      return n;
    }
    return first;
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
  std::string name_;
};

inline Script parse_script(const std::string& text, const std::string& name = "") {
  return Parser(text, name).parse();
}

}  // namespace gft::script
