#include "lexer.hpp"

#include <cctype>

#include "varcomp/errors.hpp"

namespace varcomp::detail {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    std::size_t len = 1;
    if (ident_start(c)) {
      while (i + len < text.size() && ident_char(text[i + len])) ++len;
      t.kind = Tok::Ident;
    } else if (digit(c) || (c == '.' && i + 1 < text.size() && digit(text[i + 1]))) {
      while (i + len < text.size() && digit(text[i + len])) ++len;
      if (i + len < text.size() && text[i + len] == '.') {
        ++len;
        while (i + len < text.size() && digit(text[i + len])) ++len;
      }
      if (i + len < text.size() && (text[i + len] == 'e' || text[i + len] == 'E')) {
        std::size_t k = len + 1;
        if (i + k < text.size() && (text[i + k] == '+' || text[i + k] == '-')) ++k;
        if (i + k < text.size() && digit(text[i + k])) {
          while (i + k < text.size() && digit(text[i + k])) ++k;
          len = k;
        }
      }
      t.kind = Tok::Number;
    } else {
      switch (c) {
        case '(': t.kind = Tok::LParen; break;
        case ')': t.kind = Tok::RParen; break;
        case '[': t.kind = Tok::LBracket; break;
        case ']': t.kind = Tok::RBracket; break;
        case ',': t.kind = Tok::Comma; break;
        case ';': t.kind = Tok::Semicolon; break;
        case '=': t.kind = Tok::Equals; break;
        case '+': t.kind = Tok::Plus; break;
        case '-': t.kind = Tok::Minus; break;
        case '*': t.kind = Tok::Star; break;
        case '/': t.kind = Tok::Slash; break;
        case '^': t.kind = Tok::Caret; break;
        default: {
          std::string shown(1, c);
          if (static_cast<unsigned char>(c) >= 0x80) shown = "non-ASCII character";
          throw SyntaxError(line, col, "a token", "'" + shown + "'");
        }
      }
    }
    t.text = std::string(text.substr(i, len));
    advance(len);
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + t.text + "'";
}

}  // namespace varcomp::detail
