#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace varcomp::detail {

enum class Tok : std::uint8_t {
  Ident,
  Number,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Semicolon,
  Equals,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

std::vector<Token> tokenize(std::string_view text);

std::string describe(const Token& t);

}  // namespace varcomp::detail
