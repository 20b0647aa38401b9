#include "declab/minic/lexer.hpp"

#include <cctype>
#include <charconv>
#include <unordered_map>

#include "declab/common.hpp"

namespace declab::minic {

namespace {

const std::unordered_map<std::string_view, Tok>& keywords() {
  static const std::unordered_map<std::string_view, Tok> kw = {
      {"int", Tok::KwInt},       {"double", Tok::KwDouble},
      {"void", Tok::KwVoid},     {"if", Tok::KwIf},
      {"else", Tok::KwElse},     {"while", Tok::KwWhile},
      {"for", Tok::KwFor},       {"return", Tok::KwReturn},
      {"typedef", Tok::KwTypedef}, {"extern", Tok::KwExtern},
  };
  return kw;
}

bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_cont(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1, col = 1;
  auto fail = [&](const std::string& msg) {
    throw Diag(Diag::Kind::Syntax, msg, line, col);
  };
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (i < src.size() && src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto push = [&](Tok k, int l, int c) {
    Token t;
    t.kind = k;
    t.line = l;
    t.col = c;
    out.push_back(std::move(t));
  };

  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    int tl = line, tc = col;
    if (ident_start(c)) {
      size_t j = i;
      while (j < src.size() && ident_cont(src[j])) ++j;
      std::string_view word = src.substr(i, j - i);
      auto it = keywords().find(word);
      if (it != keywords().end()) {
        push(it->second, tl, tc);
      } else {
        if (word.size() > 32) fail("identifier longer than 32 characters");
        Token t;
        t.kind = Tok::Ident;
        t.text = std::string(word);
        t.line = tl;
        t.col = tc;
        out.push_back(std::move(t));
      }
      advance(j - i);
      continue;
    }
    if (digit(c)) {
      size_t j = i;
      while (j < src.size() && digit(src[j])) ++j;
      bool is_float = false;
      if (j < src.size() && src[j] == '.' && j + 1 < src.size() &&
          digit(src[j + 1])) {
        is_float = true;
        ++j;
        while (j < src.size() && digit(src[j])) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && digit(src[k])) {
          is_float = true;
          j = k;
          while (j < src.size() && digit(src[j])) ++j;
        }
      }
      std::string_view num = src.substr(i, j - i);
      Token t;
      t.line = tl;
      t.col = tc;
      if (is_float) {
        t.kind = Tok::FloatLit;
        auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(),
                                       t.float_val);
        if (ec != std::errc() || p != num.data() + num.size())
          fail("malformed float literal");
      } else {
        if (num.size() > 19) fail("integer literal too long");
        t.kind = Tok::IntLit;
        uint64_t v = 0;
        auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
        if (ec != std::errc() || p != num.data() + num.size())
          fail("malformed integer literal");
        t.int_val = wrap32(static_cast<int64_t>(v));
      }
      out.push_back(std::move(t));
      advance(j - i);
      continue;
    }
    if (c == '"') {
      size_t j = i + 1;
      while (j < src.size() && src[j] != '"') {
        if (src[j] == '\n') fail("newline inside string literal");
        ++j;
      }
      if (j >= src.size()) fail("unterminated string literal");
      Token t;
      t.kind = Tok::StringLit;
      t.text = std::string(src.substr(i + 1, j - i - 1));
      t.line = tl;
      t.col = tc;
      out.push_back(std::move(t));
      advance(j + 1 - i);
      continue;
    }
    auto two = [&](char second) {
      return i + 1 < src.size() && src[i + 1] == second;
    };
    switch (c) {
      case '(': push(Tok::LParen, tl, tc); advance(1); continue;
      case ')': push(Tok::RParen, tl, tc); advance(1); continue;
      case '{': push(Tok::LBrace, tl, tc); advance(1); continue;
      case '}': push(Tok::RBrace, tl, tc); advance(1); continue;
      case '[': push(Tok::LBracket, tl, tc); advance(1); continue;
      case ']': push(Tok::RBracket, tl, tc); advance(1); continue;
      case ';': push(Tok::Semi, tl, tc); advance(1); continue;
      case ',': push(Tok::Comma, tl, tc); advance(1); continue;
      case '+': push(Tok::Plus, tl, tc); advance(1); continue;
      case '-': push(Tok::Minus, tl, tc); advance(1); continue;
      case '*': push(Tok::Star, tl, tc); advance(1); continue;
      case '/': push(Tok::Slash, tl, tc); advance(1); continue;
      case '%': push(Tok::Percent, tl, tc); advance(1); continue;
      case '<':
        if (two('=')) { push(Tok::Le, tl, tc); advance(2); }
        else { push(Tok::Lt, tl, tc); advance(1); }
        continue;
      case '>':
        if (two('=')) { push(Tok::Ge, tl, tc); advance(2); }
        else { push(Tok::Gt, tl, tc); advance(1); }
        continue;
      case '=':
        if (two('=')) { push(Tok::EqEq, tl, tc); advance(2); }
        else { push(Tok::Assign, tl, tc); advance(1); }
        continue;
      case '!':
        if (two('=')) { push(Tok::Ne, tl, tc); advance(2); }
        else { push(Tok::Not, tl, tc); advance(1); }
        continue;
      case '&':
        if (two('&')) { push(Tok::AndAnd, tl, tc); advance(2); }
        else { push(Tok::Amp, tl, tc); advance(1); }
        continue;
      case '|':
        if (two('|')) { push(Tok::OrOr, tl, tc); advance(2); continue; }
        fail("stray '|'");
        continue;
      default:
        fail(std::string("unexpected character '") + c + "'");
    }
  }
  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.col = col;
  out.push_back(std::move(end));
  return out;
}

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::IntLit: return "integer literal";
    case Tok::FloatLit: return "float literal";
    case Tok::StringLit: return "string literal";
    case Tok::KwInt: return "'int'";
    case Tok::KwDouble: return "'double'";
    case Tok::KwVoid: return "'void'";
    case Tok::KwIf: return "'if'";
    case Tok::KwElse: return "'else'";
    case Tok::KwWhile: return "'while'";
    case Tok::KwFor: return "'for'";
    case Tok::KwReturn: return "'return'";
    case Tok::KwTypedef: return "'typedef'";
    case Tok::KwExtern: return "'extern'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Semi: return "';'";
    case Tok::Comma: return "','";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Percent: return "'%'";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::EqEq: return "'=='";
    case Tok::Ne: return "'!='";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Not: return "'!'";
    case Tok::Amp: return "'&'";
    case Tok::Assign: return "'='";
  }
  return "?";
}

}  // namespace declab::minic
