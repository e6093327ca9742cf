#pragma once

#include <string>
#include <vector>

#include "luared/term.hpp"

namespace luared {

struct ParseError {
  std::string message;
  int line = 1;
  int column = 1;
};

enum class Tok : std::uint8_t {
  Eof, Name, Number, String,
  // keywords
  And, Break, Do, Else, Elseif, End, False, For, Function, Goto, If, In,
  Local, Nil, Not, Or, Repeat, Return, Then, True, Until, While,
  // symbols
  Plus, Minus, Star, Slash, Percent, Caret, Hash,
  EqEq, NotEq, LtEq, GtEq, Lt, Gt, Assign,
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  DbColon, Semi, Colon, Comma, Dot, Concat, Ellipsis,
};

struct Token {
  Tok kind = Tok::Eof;
  std::string text;   // raw spelling (names, symbols) or decoded bytes (strings)
  double number = 0;  // Number payload
  int line = 1;
  int column = 1;
};

// Tokenizes a whole chunk up front. Throws ParseError.
std::vector<Token> lex(const std::string& src);

const char* token_kind_name(Tok t);

} // namespace luared
