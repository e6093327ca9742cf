#include "luared/lexer.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>

namespace luared {

namespace {

const std::map<std::string, Tok>& keywords() {
  static const std::map<std::string, Tok> kw = {
      {"and", Tok::And},       {"break", Tok::Break},   {"do", Tok::Do},
      {"else", Tok::Else},     {"elseif", Tok::Elseif}, {"end", Tok::End},
      {"false", Tok::False},   {"for", Tok::For},       {"function", Tok::Function},
      {"goto", Tok::Goto},     {"if", Tok::If},         {"in", Tok::In},
      {"local", Tok::Local},   {"nil", Tok::Nil},       {"not", Tok::Not},
      {"or", Tok::Or},         {"repeat", Tok::Repeat}, {"return", Tok::Return},
      {"then", Tok::Then},     {"true", Tok::True},     {"until", Tok::Until},
      {"while", Tok::While},
  };
  return kw;
}

struct Cursor {
  const std::string& src;
  size_t pos = 0;
  int line = 1;
  int col = 1;

  bool eof() const { return pos >= src.size(); }
  char peek(size_t ahead = 0) const {
    return pos + ahead < src.size() ? src[pos + ahead] : '\0';
  }
  char take() {
    char c = src[pos++];
    if (c == '\n') {
      line++;
      col = 1;
    } else {
      col++;
    }
    return c;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError{msg, line, col}; }
};

bool name_start(char c) { return std::isalpha((unsigned char)c) || c == '_'; }
bool name_char(char c) { return std::isalnum((unsigned char)c) || c == '_'; }

// [[ [=[ etc.; returns the level or -1 when not an opening long bracket.
int long_bracket_level(const Cursor& c) {
  if (c.peek() != '[') return -1;
  size_t i = 1;
  while (c.peek(i) == '=') i++;
  return c.peek(i) == '[' ? (int)(i - 1) : -1;
}

std::string read_long_string(Cursor& c, int level, const char* what) {
  int start_line = c.line;
  c.take(); // '['
  for (int i = 0; i < level; i++) c.take();
  c.take(); // second '['
  if (c.peek() == '\r') {
    c.take();
    if (c.peek() == '\n') c.take();
  } else if (c.peek() == '\n') {
    c.take();
  }
  std::string out;
  while (true) {
    if (c.eof())
      throw ParseError{std::string("unfinished long ") + what + " (starting at line " +
                           std::to_string(start_line) + ")",
                       c.line, c.col};
    if (c.peek() == ']') {
      size_t i = 1;
      while (c.peek(i) == '=') i++;
      if ((int)(i - 1) == level && c.peek(i) == ']') {
        for (size_t k = 0; k < i + 1; k++) c.take();
        return out;
      }
    }
    out.push_back(c.take());
  }
}

std::string read_quoted_string(Cursor& c) {
  char quote = c.take();
  std::string out;
  while (true) {
    if (c.eof() || c.peek() == '\n') c.fail("unfinished string");
    char ch = c.take();
    if (ch == quote) return out;
    if (ch != '\\') {
      out.push_back(ch);
      continue;
    }
    if (c.eof()) c.fail("unfinished string");
    char e = c.take();
    switch (e) {
      case 'a': out.push_back('\a'); break;
      case 'b': out.push_back('\b'); break;
      case 'f': out.push_back('\f'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case 't': out.push_back('\t'); break;
      case 'v': out.push_back('\v'); break;
      case '\\': out.push_back('\\'); break;
      case '"': out.push_back('"'); break;
      case '\'': out.push_back('\''); break;
      case '\n': out.push_back('\n'); break;
      case '\r':
        out.push_back('\n');
        if (c.peek() == '\n') c.take();
        break;
      case 'x': {
        int v = 0, n = 0;
        while (n < 2 && std::isxdigit((unsigned char)c.peek())) {
          char h = c.take();
          v = v * 16 + (std::isdigit((unsigned char)h) ? h - '0' : (std::tolower(h) - 'a' + 10));
          n++;
        }
        if (n == 0) c.fail("hexadecimal digit expected");
        out.push_back((char)v);
        break;
      }
      case 'z':
        while (std::isspace((unsigned char)c.peek())) c.take();
        break;
      default: {
        if (!std::isdigit((unsigned char)e)) c.fail("invalid escape sequence");
        int v = e - '0';
        for (int n = 0; n < 2 && std::isdigit((unsigned char)c.peek()); n++)
          v = v * 10 + (c.take() - '0');
        if (v > 255) c.fail("decimal escape too large");
        out.push_back((char)v);
        break;
      }
    }
  }
}

double read_number(Cursor& c) {
  std::string text;
  bool hex = false;
  if (c.peek() == '0' && (c.peek(1) == 'x' || c.peek(1) == 'X')) {
    hex = true;
    text.push_back(c.take());
    text.push_back(c.take());
    bool any = false;
    while (std::isxdigit((unsigned char)c.peek())) {
      text.push_back(c.take());
      any = true;
    }
    if (c.peek() == '.') {
      text.push_back(c.take());
      while (std::isxdigit((unsigned char)c.peek())) {
        text.push_back(c.take());
        any = true;
      }
    }
    if (!any) c.fail("malformed number near '" + text + "'");
    if (c.peek() == 'p' || c.peek() == 'P') {
      text.push_back(c.take());
      if (c.peek() == '+' || c.peek() == '-') text.push_back(c.take());
      if (!std::isdigit((unsigned char)c.peek())) c.fail("malformed number near '" + text + "'");
      while (std::isdigit((unsigned char)c.peek())) text.push_back(c.take());
    }
  } else {
    while (std::isdigit((unsigned char)c.peek())) text.push_back(c.take());
    // a '.' followed by another '.' is the concat operator, not a fraction
    if (c.peek() == '.' && c.peek(1) != '.') {
      text.push_back(c.take());
      while (std::isdigit((unsigned char)c.peek())) text.push_back(c.take());
    }
    if (c.peek() == 'e' || c.peek() == 'E') {
      text.push_back(c.take());
      if (c.peek() == '+' || c.peek() == '-') text.push_back(c.take());
      if (!std::isdigit((unsigned char)c.peek())) c.fail("malformed number near '" + text + "'");
      while (std::isdigit((unsigned char)c.peek())) text.push_back(c.take());
    }
  }
  if (name_char(c.peek())) c.fail("malformed number near '" + text + c.peek() + "'");
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) c.fail("malformed number near '" + text + "'");
  (void)hex;
  return v;
}

} // namespace

std::vector<Token> lex(const std::string& src) {
  Cursor c{src};
  std::vector<Token> out;

  // skip a shebang line
  if (c.peek() == '#') {
    while (!c.eof() && c.peek() != '\n') c.take();
  }

  auto push = [&](Tok k, std::string text, int line, int col, double num = 0) {
    Token t;
    t.kind = k;
    t.text = std::move(text);
    t.number = num;
    t.line = line;
    t.column = col;
    out.push_back(std::move(t));
  };

  while (!c.eof()) {
    char ch = c.peek();
    if (std::isspace((unsigned char)ch)) {
      c.take();
      continue;
    }
    int line = c.line, col = c.col;
    if (ch == '-' && c.peek(1) == '-') {
      c.take();
      c.take();
      int lvl = long_bracket_level(c);
      if (lvl >= 0) {
        read_long_string(c, lvl, "comment");
      } else {
        while (!c.eof() && c.peek() != '\n') c.take();
      }
      continue;
    }
    if (name_start(ch)) {
      std::string name;
      while (name_char(c.peek())) name.push_back(c.take());
      auto it = keywords().find(name);
      if (it != keywords().end())
        push(it->second, name, line, col);
      else
        push(Tok::Name, name, line, col);
      continue;
    }
    if (std::isdigit((unsigned char)ch) ||
        (ch == '.' && std::isdigit((unsigned char)c.peek(1)))) {
      double v = read_number(c);
      push(Tok::Number, "", line, col, v);
      continue;
    }
    if (ch == '"' || ch == '\'') {
      push(Tok::String, read_quoted_string(c), line, col);
      continue;
    }
    if (ch == '[') {
      int lvl = long_bracket_level(c);
      if (lvl >= 0) {
        push(Tok::String, read_long_string(c, lvl, "string"), line, col);
        continue;
      }
      c.take();
      push(Tok::LBracket, "[", line, col);
      continue;
    }
    c.take();
    switch (ch) {
      case '+': push(Tok::Plus, "+", line, col); break;
      case '-': push(Tok::Minus, "-", line, col); break;
      case '*': push(Tok::Star, "*", line, col); break;
      case '/': push(Tok::Slash, "/", line, col); break;
      case '%': push(Tok::Percent, "%", line, col); break;
      case '^': push(Tok::Caret, "^", line, col); break;
      case '#': push(Tok::Hash, "#", line, col); break;
      case ';': push(Tok::Semi, ";", line, col); break;
      case ',': push(Tok::Comma, ",", line, col); break;
      case '(': push(Tok::LParen, "(", line, col); break;
      case ')': push(Tok::RParen, ")", line, col); break;
      case '{': push(Tok::LBrace, "{", line, col); break;
      case '}': push(Tok::RBrace, "}", line, col); break;
      case ']': push(Tok::RBracket, "]", line, col); break;
      case '=':
        if (c.peek() == '=') {
          c.take();
          push(Tok::EqEq, "==", line, col);
        } else {
          push(Tok::Assign, "=", line, col);
        }
        break;
      case '~':
        if (c.peek() == '=') {
          c.take();
          push(Tok::NotEq, "~=", line, col);
        } else {
          throw ParseError{"unexpected symbol near '~'", line, col};
        }
        break;
      case '<':
        if (c.peek() == '=') {
          c.take();
          push(Tok::LtEq, "<=", line, col);
        } else {
          push(Tok::Lt, "<", line, col);
        }
        break;
      case '>':
        if (c.peek() == '=') {
          c.take();
          push(Tok::GtEq, ">=", line, col);
        } else {
          push(Tok::Gt, ">", line, col);
        }
        break;
      case ':':
        if (c.peek() == ':') {
          c.take();
          push(Tok::DbColon, "::", line, col);
        } else {
          push(Tok::Colon, ":", line, col);
        }
        break;
      case '.':
        if (c.peek() == '.') {
          c.take();
          if (c.peek() == '.') {
            c.take();
            push(Tok::Ellipsis, "...", line, col);
          } else {
            push(Tok::Concat, "..", line, col);
          }
        } else {
          push(Tok::Dot, ".", line, col);
        }
        break;
      default:
        throw ParseError{std::string("unexpected symbol near '") + ch + "'", line, col};
    }
  }
  Token eof;
  eof.kind = Tok::Eof;
  eof.text = "<eof>";
  eof.line = c.line;
  eof.column = c.col;
  out.push_back(std::move(eof));
  return out;
}

const char* token_kind_name(Tok t) {
  switch (t) {
    case Tok::Eof: return "<eof>";
    case Tok::Name: return "name";
    case Tok::Number: return "number";
    case Tok::String: return "string";
    default: return "symbol";
  }
}

} // namespace luared
