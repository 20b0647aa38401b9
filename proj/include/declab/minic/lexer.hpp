#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace declab::minic {

enum class Tok {
  End, Ident, IntLit, FloatLit, StringLit,
  KwInt, KwDouble, KwVoid, KwIf, KwElse, KwWhile, KwFor, KwReturn,
  KwTypedef, KwExtern,
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Semi, Comma,
  Plus, Minus, Star, Slash, Percent,
  Lt, Le, Gt, Ge, EqEq, Ne, AndAnd, OrOr, Not, Amp,
  Assign,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;    // identifier spelling or raw string-literal bytes
  int32_t int_val = 0;
  double float_val = 0.0;
  int line = 1, col = 1;
};

// Parse and type errors share one exception; `kind` distinguishes them in
// messages presented to callers.
struct Diag : std::runtime_error {
  enum class Kind { Syntax, Type, Unsupported };
  Kind kind;
  int line, col;
  Diag(Kind k, std::string msg, int line_, int col_)
      : std::runtime_error(std::move(msg)), kind(k), line(line_), col(col_) {}
};

// Tokenizes a whole translation unit; throws Diag(Syntax) on malformed input.
std::vector<Token> lex(std::string_view src);

const char* tok_name(Tok t);

}  // namespace declab::minic
