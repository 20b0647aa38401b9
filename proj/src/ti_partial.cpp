#include "declab/ti/ti.hpp"

namespace declab::ti {

namespace {

using minic::Ast;
using minic::Expr;
using minic::ExprPtr;
using minic::Stmt;
using minic::StmtPtr;

int count_expr(const Expr& e) {
  if (e.kind == Expr::Kind::Ambig) return 1 + count_expr(*e.rhs);
  int n = 0;
  if (e.lhs) n += count_expr(*e.lhs);
  if (e.rhs) n += count_expr(*e.rhs);
  for (const auto& a : e.args) n += count_expr(*a);
  return n;
}

int count_block(const std::vector<StmtPtr>& body);

int count_stmt(const Stmt& s) {
  if (s.kind == Stmt::Kind::AmbigDecl) return 1;
  int n = 0;
  if (s.init) n += count_expr(*s.init);
  if (s.target) n += count_expr(*s.target);
  if (s.value) n += count_expr(*s.value);
  if (s.cond) n += count_expr(*s.cond);
  if (s.expr) n += count_expr(*s.expr);
  if (s.for_init) n += count_stmt(*s.for_init);
  if (s.for_step) n += count_stmt(*s.for_step);
  n += count_block(s.body);
  n += count_block(s.else_body);
  return n;
}

int count_block(const std::vector<StmtPtr>& body) {
  int n = 0;
  for (const auto& s : body) n += count_stmt(*s);
  return n;
}

// Sites are numbered in the same pre-order count_* uses.
struct Resolver {
  uint32_t mask;
  int next = 0;

  void expr(ExprPtr& e) {
    if (e->kind == Expr::Kind::Ambig) {
      bool cast_side = (mask >> next++) & 1;
      ExprPtr chosen = std::move(cast_side ? e->lhs : e->rhs);
      e = std::move(chosen);
      expr(e);  // the chosen side may contain further sites
      return;
    }
    if (e->lhs) expr(e->lhs);
    if (e->rhs) expr(e->rhs);
    for (auto& a : e->args) expr(a);
  }

  void stmt(StmtPtr& s) {
    if (s->kind == Stmt::Kind::AmbigDecl) {
      bool decl_side = (mask >> next++) & 1;
      StmtPtr repl;
      if (decl_side) {
        repl = Stmt::decl(s->decl_ty, s->decl_name, nullptr);
      } else {
        repl = Stmt::expr_stmt(std::move(s->expr));
      }
      repl->line = s->line;
      repl->col = s->col;
      s = std::move(repl);
      return;
    }
    if (s->init) expr(s->init);
    if (s->target) expr(s->target);
    if (s->value) expr(s->value);
    if (s->cond) expr(s->cond);
    if (s->expr) expr(s->expr);
    if (s->for_init) stmt(s->for_init);
    if (s->for_step) stmt(s->for_step);
    for (auto& c : s->body) stmt(c);
    for (auto& c : s->else_body) stmt(c);
  }
};

}  // namespace

int count_ambiguities(const Ast& ast) { return count_block(ast.body); }

void resolve_ambiguities(Ast& ast, uint32_t mask) {
  Resolver r{mask};
  for (auto& s : ast.body) r.stmt(s);
}

}  // namespace declab::ti
