#pragma once

#include <string>
#include <vector>

#include "gft/errors.hpp"
#include "gft/script/ast.hpp"

namespace gft::script {

struct Token {
  enum class Kind { Ident, Number, String, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  Span span;
};

class SyntaxError : public EngineError {
 public:
  SyntaxError(Span span, const std::string& message)
      : EngineError(ErrorKind::Syntax, "line " + std::to_string(span.line) + ", col " +
                                           std::to_string(span.col) + ": " + message),
        span_(span) {}
  Span span() const { return span_; }

 private:
  Span span_;
};

inline std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (text[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  while (i < text.size()) {
    char ch = text[i];
    if (ch == '#') {
      size_t j = i;
      while (j < text.size() && text[j] != '\n') ++j;
      advance(j - i);
      continue;
    }
    if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
      advance(1);
      continue;
    }
    Span span{line, col};
    if (isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      size_t j = i;
      while (j < text.size() &&
             (isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      out.push_back(Token{Token::Kind::Ident, text.substr(i, j - i), span});
      advance(j - i);
      continue;
    }
    if (isdigit(static_cast<unsigned char>(ch))) {
      size_t j = i;
      while (j < text.size() && isdigit(static_cast<unsigned char>(text[j]))) ++j;
      out.push_back(Token{Token::Kind::Number, text.substr(i, j - i), span});
      advance(j - i);
      continue;
    }
    if (ch == '"') {
      size_t j = i + 1;
      std::string value;
      while (j < text.size() && text[j] != '"') {
        if (text[j] == '\n') throw SyntaxError(span, "unterminated string literal");
        value += text[j++];
      }
      if (j >= text.size()) throw SyntaxError(span, "unterminated string literal");
      out.push_back(Token{Token::Kind::String, value, span});
      advance(j + 1 - i);
      continue;
    }
    static const std::string puncts = "+-*/^(),;:=[]{}";
    if (puncts.find(ch) != std::string::npos) {
      out.push_back(Token{Token::Kind::Punct, std::string(1, ch), span});
      advance(1);
      continue;
    }
    throw SyntaxError(span, std::string("unexpected character '") + ch + "'");
  }
  out.push_back(Token{Token::Kind::End, "", Span{line, col}});
  return out;
}

}  // namespace gft::script
