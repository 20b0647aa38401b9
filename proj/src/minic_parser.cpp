#include "declab/minic/parse.hpp"

#include <map>
#include <set>

#include "declab/minic/lexer.hpp"

namespace declab::minic {

namespace {

class Parser {
 public:
  Parser(std::vector<Token> toks, bool partial)
      : toks_(std::move(toks)), partial_(partial) {
    // Identifiers directly followed by another identifier can only be type
    // names (`mytype x`, `mytype f(`): remember them so later ambiguous
    // uses of the same name resolve to the type reading.
    for (size_t k = 0; k + 1 < toks_.size(); ++k)
      if (toks_[k].kind == Tok::Ident && toks_[k + 1].kind == Tok::Ident)
        typeish_.insert(toks_[k].text);
  }

  Ast run() {
    Ast ast;
    parse_prelude(ast);
    parse_header(ast);
    push_scope();
    for (auto& p : ast.params) declare_value(p.first);
    expect(Tok::LBrace, "'{' to open the function body");
    while (!at(Tok::RBrace)) ast.body.push_back(parse_stmt());
    expect(Tok::RBrace, "'}'");
    pop_scope();
    expect(Tok::End, "end of input after the function");
    return ast;
  }

  std::vector<std::string> take_unknowns() { return std::move(unknown_order_); }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  bool partial_;
  std::set<std::string> typeish_;
  std::map<std::string, TyRef> typedefs_;
  std::set<std::string> extern_names_;
  std::vector<std::set<std::string>> scopes_;
  std::vector<std::string> unknown_order_;
  std::set<std::string> unknown_seen_;

  // --- token helpers ---
  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(size_t n) const {
    size_t i = pos_ + n;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(Tok k) const { return cur().kind == k; }
  Token eat() { return toks_[pos_++]; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw Diag(Diag::Kind::Syntax, msg, cur().line, cur().col);
  }
  [[noreturn]] void fail_unsupported(const std::string& msg) const {
    throw Diag(Diag::Kind::Unsupported, msg, cur().line, cur().col);
  }
  Token expect(Tok k, const std::string& what) {
    if (!at(k))
      fail("expected " + what + ", found " + tok_name(cur().kind));
    return eat();
  }

  // --- scopes and unknowns ---
  void push_scope() { scopes_.emplace_back(); }
  void pop_scope() { scopes_.pop_back(); }
  void declare_value(const std::string& name) { scopes_.back().insert(name); }
  bool value_in_scope(const std::string& name) const {
    for (const auto& s : scopes_)
      if (s.count(name)) return true;
    return false;
  }
  void record_unknown(const std::string& name) {
    if (unknown_seen_.insert(name).second) unknown_order_.push_back(name);
  }
  bool is_type_name(const std::string& name) const {
    if (typedefs_.count(name)) return true;
    return partial_ && !value_in_scope(name) && typeish_.count(name) > 0;
  }

  // --- types ---
  bool at_type_start() const {
    if (at(Tok::KwInt) || at(Tok::KwDouble)) return true;
    return at(Tok::Ident) && is_type_name(cur().text) &&
           peek(1).kind != Tok::LParen && peek(1).kind != Tok::Assign;
  }

  TyRef parse_base_type(bool allow_void) {
    if (at(Tok::KwInt)) { eat(); return Ty::make_int(); }
    if (at(Tok::KwDouble)) { eat(); return Ty::make_float(); }
    if (at(Tok::KwVoid)) {
      if (!allow_void) fail("'void' is not usable here");
      eat();
      return Ty::make_void();
    }
    if (at(Tok::Ident)) {
      std::string name = cur().text;
      auto it = typedefs_.find(name);
      if (it != typedefs_.end()) {
        eat();
        return Ty::make_alias(name, it->second);
      }
      if (partial_) {
        eat();
        record_unknown(name);
        return Ty::make_alias(name, nullptr);
      }
      fail("unknown type name '" + name + "'");
    }
    fail("expected a type");
  }

  TyRef parse_type(bool allow_void) {
    TyRef base = parse_base_type(allow_void);
    if (at(Tok::Star)) {
      eat();
      if (resolve(base) && resolve(base)->kind == Ty::Kind::Void)
        fail_unsupported("pointers to void");
      if (at(Tok::Star)) fail_unsupported("nested pointer types");
      return Ty::make_ptr(base);
    }
    return base;
  }

  // --- prelude ---
  void parse_prelude(Ast& ast) {
    while (at(Tok::KwTypedef) || at(Tok::KwExtern)) {
      if (at(Tok::KwTypedef)) {
        eat();
        TyRef ty;
        if (at(Tok::KwInt)) { eat(); ty = Ty::make_int(); }
        else if (at(Tok::KwDouble)) { eat(); ty = Ty::make_float(); }
        else fail("typedef must name 'int' or 'double'");
        Token name = expect(Tok::Ident, "typedef name");
        expect(Tok::Semi, "';' after typedef");
        if (typedefs_.count(name.text))
          throw Diag(Diag::Kind::Type, "duplicate typedef '" + name.text + "'",
                     name.line, name.col);
        typedefs_[name.text] = ty;
        ast.typedefs.push_back({name.text, ty});
      } else {
        eat();
        ExternDecl d;
        d.ret = parse_type(/*allow_void=*/true);
        if (resolve(d.ret) && resolve(d.ret)->kind == Ty::Kind::Ptr)
          fail_unsupported("pointer-returning extern functions");
        Token name = expect(Tok::Ident, "extern function name");
        d.name = name.text;
        expect(Tok::LParen, "'(' in extern declaration");
        if (!at(Tok::RParen)) {
          for (;;) {
            d.params.push_back(parse_type(/*allow_void=*/false));
            if (at(Tok::Comma)) { eat(); continue; }
            break;
          }
        }
        expect(Tok::RParen, "')' in extern declaration");
        expect(Tok::Semi, "';' after extern declaration");
        if (extern_names_.count(d.name))
          throw Diag(Diag::Kind::Type, "duplicate extern '" + d.name + "'",
                     name.line, name.col);
        extern_names_.insert(d.name);
        ast.externs.push_back(std::move(d));
      }
    }
  }

  void parse_header(Ast& ast) {
    ast.ret = parse_type(/*allow_void=*/true);
    if (resolve(ast.ret) && resolve(ast.ret)->kind == Ty::Kind::Ptr)
      fail_unsupported("pointer-returning functions");
    Token name = expect(Tok::Ident, "function name");
    ast.name = name.text;
    expect(Tok::LParen, "'(' after function name");
    if (!at(Tok::RParen)) {
      for (;;) {
        TyRef ty = parse_type(/*allow_void=*/false);
        Token pn = expect(Tok::Ident, "parameter name");
        ast.params.emplace_back(pn.text, ty);
        if (at(Tok::Comma)) { eat(); continue; }
        break;
      }
    }
    expect(Tok::RParen, "')' after parameters");
    if (ast.params.size() > 6)
      throw Diag(Diag::Kind::Type, "more than 6 parameters", name.line,
                 name.col);
  }

  // --- statements ---
  std::vector<StmtPtr> parse_block() {
    expect(Tok::LBrace, "'{'");
    push_scope();
    std::vector<StmtPtr> body;
    while (!at(Tok::RBrace)) body.push_back(parse_stmt());
    expect(Tok::RBrace, "'}'");
    pop_scope();
    return body;
  }

  StmtPtr parse_stmt() {
    switch (cur().kind) {
      case Tok::KwInt:
      case Tok::KwDouble:
        return parse_decl(/*eat_semi=*/true);
      case Tok::KwIf: return parse_if();
      case Tok::KwWhile: return parse_while();
      case Tok::KwFor: return parse_for();
      case Tok::KwReturn: return parse_return();
      case Tok::Ident: {
        // `name x ...` can only be a declaration with an alias type.
        if (peek(1).kind == Tok::Ident) return parse_decl(true);
        if (peek(1).kind == Tok::Star && peek(2).kind == Tok::Ident) {
          const std::string& head = cur().text;
          if (value_in_scope(head)) return parse_expr_or_assign_stmt();
          if (peek(3).kind == Tok::Assign) return parse_decl(true);
          if (peek(3).kind == Tok::Semi) {
            if (is_type_name(head)) return parse_decl(true);
            if (!partial_) fail("unknown identifier '" + head + "'");
            return parse_ambig_decl();
          }
          // Anything else (`a * b[0] = ...`, `a * b + c;`) only parses as
          // an expression.
          return parse_expr_or_assign_stmt();
        }
        return parse_expr_or_assign_stmt();
      }
      default:
        return parse_expr_or_assign_stmt();
    }
  }

  StmtPtr parse_decl(bool eat_semi) {
    int line = cur().line, col = cur().col;
    TyRef ty = parse_type(/*allow_void=*/false);
    Token name = expect(Tok::Ident, "variable name");
    ExprPtr init;
    if (at(Tok::Assign)) {
      eat();
      init = parse_expr();
    }
    if (eat_semi) expect(Tok::Semi, "';' after declaration");
    declare_value(name.text);
    auto s = Stmt::decl(std::move(ty), name.text, std::move(init));
    s->line = line;
    s->col = col;
    return s;
  }

  // `a * b ;` with `a` unknown: pointer declaration or product expression.
  StmtPtr parse_ambig_decl() {
    Token a = eat();
    eat();  // '*'
    Token b = eat();
    expect(Tok::Semi, "';'");
    record_unknown(a.text);
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::AmbigDecl;
    s->line = a.line;
    s->col = a.col;
    s->ambig_name = a.text;
    s->decl_ty = Ty::make_ptr(Ty::make_alias(a.text, nullptr));
    s->decl_name = b.text;
    s->expr = Expr::binary(BinOp::Mul, Expr::var(a.text), Expr::var(b.text));
    // Optimistically treat the declaration reading's name as in scope so
    // later uses of it do not look undeclared.
    declare_value(b.text);
    return s;
  }

  StmtPtr parse_if() {
    int line = cur().line, col = cur().col;
    eat();
    expect(Tok::LParen, "'(' after 'if'");
    ExprPtr cond = parse_expr();
    expect(Tok::RParen, "')' after condition");
    std::vector<StmtPtr> then_body = parse_block();
    std::vector<StmtPtr> else_body;
    if (at(Tok::KwElse)) {
      eat();
      else_body = parse_block();
    }
    auto s = Stmt::if_stmt(std::move(cond), std::move(then_body),
                           std::move(else_body));
    s->line = line;
    s->col = col;
    return s;
  }

  StmtPtr parse_while() {
    int line = cur().line, col = cur().col;
    eat();
    expect(Tok::LParen, "'(' after 'while'");
    ExprPtr cond = parse_expr();
    expect(Tok::RParen, "')' after condition");
    auto s = Stmt::while_stmt(std::move(cond), parse_block());
    s->line = line;
    s->col = col;
    return s;
  }

  StmtPtr parse_for() {
    int line = cur().line, col = cur().col;
    eat();
    expect(Tok::LParen, "'(' after 'for'");
    StmtPtr init;
    if (at_type_start()) {
      init = parse_decl(/*eat_semi=*/false);
    } else {
      init = parse_assign_no_semi();
    }
    expect(Tok::Semi, "';' after for-initializer");
    ExprPtr cond = parse_expr();
    expect(Tok::Semi, "';' after for-condition");
    StmtPtr step = parse_assign_no_semi();
    expect(Tok::RParen, "')' after for-step");
    auto s = Stmt::for_stmt(std::move(init), std::move(cond), std::move(step),
                            parse_block());
    s->line = line;
    s->col = col;
    return s;
  }

  StmtPtr parse_return() {
    int line = cur().line, col = cur().col;
    eat();
    ExprPtr e;
    if (!at(Tok::Semi)) e = parse_expr();
    expect(Tok::Semi, "';' after return");
    auto s = Stmt::return_stmt(std::move(e));
    s->line = line;
    s->col = col;
    return s;
  }

  bool assignable(const Expr& e) const {
    return e.kind == Expr::Kind::Var || e.kind == Expr::Kind::Index ||
           e.kind == Expr::Kind::Deref;
  }

  StmtPtr parse_assign_no_semi() {
    int line = cur().line, col = cur().col;
    ExprPtr target = parse_expr();
    if (!at(Tok::Assign)) fail("expected '=' (assignment)");
    if (!assignable(*target)) fail("assignment target is not assignable");
    eat();
    ExprPtr value = parse_expr();
    auto s = Stmt::assign(std::move(target), std::move(value));
    s->line = line;
    s->col = col;
    return s;
  }

  StmtPtr parse_expr_or_assign_stmt() {
    int line = cur().line, col = cur().col;
    ExprPtr e = parse_expr();
    StmtPtr s;
    if (at(Tok::Assign)) {
      if (!assignable(*e)) fail("assignment target is not assignable");
      eat();
      ExprPtr value = parse_expr();
      s = Stmt::assign(std::move(e), std::move(value));
    } else {
      s = Stmt::expr_stmt(std::move(e));
    }
    expect(Tok::Semi, "';' after statement");
    s->line = line;
    s->col = col;
    return s;
  }

  // --- expressions (precedence climbing, all binary ops left-assoc) ---
  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    ExprPtr l = parse_and();
    while (at(Tok::OrOr)) {
      eat();
      l = Expr::binary(BinOp::Or, std::move(l), parse_and());
    }
    return l;
  }

  ExprPtr parse_and() {
    ExprPtr l = parse_cmp();
    while (at(Tok::AndAnd)) {
      eat();
      l = Expr::binary(BinOp::And, std::move(l), parse_cmp());
    }
    return l;
  }

  ExprPtr parse_cmp() {
    ExprPtr l = parse_add();
    for (;;) {
      BinOp op;
      switch (cur().kind) {
        case Tok::Lt: op = BinOp::Lt; break;
        case Tok::Le: op = BinOp::Le; break;
        case Tok::Gt: op = BinOp::Gt; break;
        case Tok::Ge: op = BinOp::Ge; break;
        case Tok::EqEq: op = BinOp::Eq; break;
        case Tok::Ne: op = BinOp::Ne; break;
        default: return l;
      }
      eat();
      l = Expr::binary(op, std::move(l), parse_add());
    }
  }

  ExprPtr parse_add() {
    ExprPtr l = parse_mul();
    for (;;) {
      if (at(Tok::Plus)) {
        eat();
        l = Expr::binary(BinOp::Add, std::move(l), parse_mul());
      } else if (at(Tok::Minus)) {
        eat();
        l = Expr::binary(BinOp::Sub, std::move(l), parse_mul());
      } else {
        return l;
      }
    }
  }

  ExprPtr parse_mul() {
    ExprPtr l = parse_unary();
    for (;;) {
      BinOp op;
      if (at(Tok::Star)) op = BinOp::Mul;
      else if (at(Tok::Slash)) op = BinOp::Div;
      else if (at(Tok::Percent)) op = BinOp::Mod;
      else return l;
      eat();
      l = Expr::binary(op, std::move(l), parse_unary());
    }
  }

  ExprPtr parse_unary() {
    int line = cur().line, col = cur().col;
    ExprPtr e;
    if (at(Tok::Minus)) {
      eat();
      e = Expr::unary(UnOp::Neg, parse_unary());
    } else if (at(Tok::Not)) {
      eat();
      e = Expr::unary(UnOp::Not, parse_unary());
    } else if (at(Tok::Star)) {
      eat();
      e = Expr::deref(parse_unary());
    } else if (at(Tok::Amp)) {
      eat();
      Token name = expect(Tok::Ident, "variable name after '&'");
      if (!value_in_scope(name.text)) {
        if (!partial_)
          fail("'&' applied to undeclared variable '" + name.text + "'");
        record_unknown(name.text);
      }
      e = Expr::addr_of(name.text);
    } else {
      return parse_postfix();
    }
    e->line = line;
    e->col = col;
    return e;
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    while (at(Tok::LBracket)) {
      eat();
      ExprPtr idx = parse_expr();
      expect(Tok::RBracket, "']'");
      e = Expr::index(std::move(e), std::move(idx));
    }
    return e;
  }

  ExprPtr parse_primary() {
    int line = cur().line, col = cur().col;
    ExprPtr e;
    switch (cur().kind) {
      case Tok::IntLit:
        e = Expr::int_lit(eat().int_val);
        break;
      case Tok::FloatLit:
        e = Expr::float_lit(eat().float_val);
        break;
      case Tok::StringLit:
        e = Expr::string_lit(eat().text);
        break;
      case Tok::Ident: {
        Token name = eat();
        if (at(Tok::LParen)) {
          eat();
          std::vector<ExprPtr> args;
          if (!at(Tok::RParen)) {
            for (;;) {
              args.push_back(parse_expr());
              if (at(Tok::Comma)) { eat(); continue; }
              break;
            }
          }
          expect(Tok::RParen, "')' after call arguments");
          if (!extern_names_.count(name.text)) {
            if (!partial_)
              throw Diag(Diag::Kind::Syntax,
                         "call to undeclared function '" + name.text + "'",
                         name.line, name.col);
            record_unknown(name.text);
          }
          e = Expr::call(name.text, std::move(args));
        } else {
          if (partial_ && !value_in_scope(name.text))
            record_unknown(name.text);
          e = Expr::var(name.text);
        }
        break;
      }
      case Tok::LParen: {
        eat();
        if (at(Tok::KwInt) || at(Tok::KwDouble)) {
          TyRef ty = at(Tok::KwInt) ? Ty::make_int() : Ty::make_float();
          eat();
          if (at(Tok::Star)) fail_unsupported("pointer casts");
          expect(Tok::RParen, "')' after cast type");
          e = Expr::cast(std::move(ty), parse_unary());
          break;
        }
        if (at(Tok::Ident) && peek(1).kind == Tok::RParen) {
          e = parse_paren_ident(eat());
          break;
        }
        e = parse_expr();
        expect(Tok::RParen, "')'");
        break;
      }
      default:
        fail("expected an expression");
    }
    e->line = line;
    e->col = col;
    return e;
  }

  // Called with `name` eaten and ')' current: classify `(name) ...`.
  ExprPtr parse_paren_ident(Token name) {
    eat();  // ')'
    bool is_value = value_in_scope(name.text);
    bool is_type = !is_value && is_type_name(name.text);
    // Tokens after `)` that force the cast reading: anything that can start
    // an operand but cannot continue a binary expression.
    bool cast_start = at(Tok::Not) || at(Tok::Amp) || at(Tok::IntLit) ||
                      at(Tok::FloatLit) || at(Tok::StringLit) ||
                      at(Tok::Ident) || at(Tok::LParen);
    bool ambiguous_star = at(Tok::Star);
    if (is_type || (!is_value && cast_start)) {
      TyRef ty;
      auto it = typedefs_.find(name.text);
      if (it != typedefs_.end()) {
        ty = Ty::make_alias(name.text, it->second);
      } else {
        if (!partial_) fail("unknown identifier '" + name.text + "'");
        record_unknown(name.text);
        ty = Ty::make_alias(name.text, nullptr);
      }
      return Expr::cast(std::move(ty), parse_unary());
    }
    if (is_value || !ambiguous_star) {
      // Parenthesized variable; binary operators, `;`, `)`, … continue in
      // the caller. `(a)-b` with unknown `a` lands here too: the value
      // reading (subtraction) is preferred over a cast of a negation.
      if (partial_ && !is_value) record_unknown(name.text);
      if (!partial_ && !is_value) fail("unknown identifier '" + name.text + "'");
      return Expr::var(name.text);
    }
    // `(a) * u` with unknown `a`: cast-of-dereference or multiplication.
    if (!partial_) fail("unknown identifier '" + name.text + "'");
    eat();  // '*'
    record_unknown(name.text);
    ExprPtr operand = parse_unary();
    ExprPtr operand2 = clone(*operand);
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Ambig;
    e->name = name.text;
    e->lhs = Expr::cast(Ty::make_alias(name.text, nullptr),
                        Expr::deref(std::move(operand)));
    e->rhs = Expr::binary(BinOp::Mul, Expr::var(name.text),
                          std::move(operand2));
    return e;
  }
};

}  // namespace

Ast parse_program(std::string_view text) {
  Parser p(lex(text), /*partial=*/false);
  return p.run();
}

ParsedPartial parse_partial_program(std::string_view text) {
  Parser p(lex(text), /*partial=*/true);
  ParsedPartial out;
  out.ast = p.run();
  out.unknowns = p.take_unknowns();
  return out;
}

}  // namespace declab::minic
