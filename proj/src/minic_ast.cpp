#include "declab/minic/ast.hpp"

#include <cassert>
#include <cstring>

namespace declab::minic {

namespace {
TyRef singleton(Ty::Kind k) {
  auto t = std::make_shared<Ty>();
  t->kind = k;
  return t;
}
}  // namespace

TyRef Ty::make_int() {
  static TyRef t = singleton(Kind::Int);
  return t;
}

TyRef Ty::make_float() {
  static TyRef t = singleton(Kind::Float);
  return t;
}

TyRef Ty::make_void() {
  static TyRef t = singleton(Kind::Void);
  return t;
}

TyRef Ty::make_ptr(TyRef elem) {
  auto t = std::make_shared<Ty>();
  t->kind = Kind::Ptr;
  t->elem = std::move(elem);
  return t;
}

TyRef Ty::make_func(std::vector<TyRef> params, TyRef ret) {
  auto t = std::make_shared<Ty>();
  t->kind = Kind::Func;
  t->params = std::move(params);
  t->ret = std::move(ret);
  return t;
}

TyRef Ty::make_alias(std::string name, TyRef resolved) {
  auto t = std::make_shared<Ty>();
  t->kind = Kind::Alias;
  t->alias_name = std::move(name);
  t->resolved = std::move(resolved);
  return t;
}

TyRef resolve(const TyRef& t) {
  TyRef cur = t;
  while (cur && cur->kind == Ty::Kind::Alias && cur->resolved)
    cur = cur->resolved;
  return cur;
}

bool ty_equal(const TyRef& a, const TyRef& b) {
  TyRef x = resolve(a), y = resolve(b);
  if (!x || !y) return x == y;
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case Ty::Kind::Int:
    case Ty::Kind::Float:
    case Ty::Kind::Void:
      return true;
    case Ty::Kind::Ptr:
      return ty_equal(x->elem, y->elem);
    case Ty::Kind::Func: {
      if (x->params.size() != y->params.size()) return false;
      for (size_t i = 0; i < x->params.size(); ++i)
        if (!ty_equal(x->params[i], y->params[i])) return false;
      return ty_equal(x->ret, y->ret);
    }
    case Ty::Kind::Alias:
      // Both unresolved: equal only by name.
      return x->alias_name == y->alias_name;
  }
  return false;
}

bool is_scalar(const TyRef& t) {
  TyRef r = resolve(t);
  return r && (r->kind == Ty::Kind::Int || r->kind == Ty::Kind::Float);
}

std::string ty_to_string(const TyRef& t) {
  if (!t) return "<null>";
  switch (t->kind) {
    case Ty::Kind::Int: return "int";
    case Ty::Kind::Float: return "double";
    case Ty::Kind::Void: return "void";
    case Ty::Kind::Ptr: return ty_to_string(t->elem) + " *";
    case Ty::Kind::Func: {
      std::string s = ty_to_string(t->ret) + " (";
      for (size_t i = 0; i < t->params.size(); ++i) {
        if (i) s += ", ";
        s += ty_to_string(t->params[i]);
      }
      return s + ")";
    }
    case Ty::Kind::Alias: return t->alias_name;
  }
  return "<?>";
}

// --- expression factories ---

static ExprPtr make_expr(Expr::Kind k) {
  auto e = std::make_unique<Expr>();
  e->kind = k;
  return e;
}

ExprPtr Expr::int_lit(int32_t v) {
  auto e = make_expr(Kind::IntLit);
  e->int_val = v;
  return e;
}

ExprPtr Expr::float_lit(double v) {
  auto e = make_expr(Kind::FloatLit);
  e->float_val = v;
  return e;
}

ExprPtr Expr::string_lit(std::string bytes) {
  auto e = make_expr(Kind::StringLit);
  e->str_val = std::move(bytes);
  return e;
}

ExprPtr Expr::var(std::string name) {
  auto e = make_expr(Kind::Var);
  e->name = std::move(name);
  return e;
}

ExprPtr Expr::unary(UnOp op, ExprPtr inner) {
  auto e = make_expr(Kind::Unary);
  e->un_op = op;
  e->lhs = std::move(inner);
  return e;
}

ExprPtr Expr::binary(BinOp op, ExprPtr l, ExprPtr r) {
  auto e = make_expr(Kind::Binary);
  e->bin_op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

ExprPtr Expr::index(ExprPtr base, ExprPtr idx) {
  auto e = make_expr(Kind::Index);
  e->lhs = std::move(base);
  e->rhs = std::move(idx);
  return e;
}

ExprPtr Expr::deref(ExprPtr inner) {
  auto e = make_expr(Kind::Deref);
  e->lhs = std::move(inner);
  return e;
}

ExprPtr Expr::addr_of(std::string name) {
  auto e = make_expr(Kind::AddrOf);
  e->name = std::move(name);
  return e;
}

ExprPtr Expr::cast(TyRef ty, ExprPtr inner) {
  auto e = make_expr(Kind::Cast);
  e->cast_ty = std::move(ty);
  e->lhs = std::move(inner);
  return e;
}

ExprPtr Expr::call(std::string callee, std::vector<ExprPtr> args) {
  auto e = make_expr(Kind::Call);
  e->name = std::move(callee);
  e->args = std::move(args);
  return e;
}

ExprPtr clone(const Expr& e) {
  auto out = std::make_unique<Expr>();
  out->kind = e.kind;
  out->line = e.line;
  out->col = e.col;
  out->int_val = e.int_val;
  out->float_val = e.float_val;
  out->str_val = e.str_val;
  out->name = e.name;
  out->un_op = e.un_op;
  out->bin_op = e.bin_op;
  if (e.lhs) out->lhs = clone(*e.lhs);
  if (e.rhs) out->rhs = clone(*e.rhs);
  out->cast_ty = e.cast_ty;
  for (const auto& a : e.args) out->args.push_back(clone(*a));
  out->ty = e.ty;
  return out;
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::IntLit: return a.int_val == b.int_val;
    case Expr::Kind::FloatLit: {
      uint64_t x, y;
      static_assert(sizeof(double) == 8);
      std::memcpy(&x, &a.float_val, 8);
      std::memcpy(&y, &b.float_val, 8);
      return x == y;
    }
    case Expr::Kind::StringLit: return a.str_val == b.str_val;
    case Expr::Kind::Var: return a.name == b.name;
    case Expr::Kind::Unary:
      return a.un_op == b.un_op && expr_equal(*a.lhs, *b.lhs);
    case Expr::Kind::Binary:
      return a.bin_op == b.bin_op && expr_equal(*a.lhs, *b.lhs) &&
             expr_equal(*a.rhs, *b.rhs);
    case Expr::Kind::Index:
      return expr_equal(*a.lhs, *b.lhs) && expr_equal(*a.rhs, *b.rhs);
    case Expr::Kind::Deref: return expr_equal(*a.lhs, *b.lhs);
    case Expr::Kind::AddrOf: return a.name == b.name;
    case Expr::Kind::Cast:
      return ty_equal(a.cast_ty, b.cast_ty) && expr_equal(*a.lhs, *b.lhs);
    case Expr::Kind::Call: {
      if (a.name != b.name || a.args.size() != b.args.size()) return false;
      for (size_t i = 0; i < a.args.size(); ++i)
        if (!expr_equal(*a.args[i], *b.args[i])) return false;
      return true;
    }
    case Expr::Kind::Ambig:
      return a.name == b.name && expr_equal(*a.lhs, *b.lhs) &&
             expr_equal(*a.rhs, *b.rhs);
  }
  return false;
}

// --- statement factories ---

static StmtPtr make_stmt(Stmt::Kind k) {
  auto s = std::make_unique<Stmt>();
  s->kind = k;
  return s;
}

StmtPtr Stmt::decl(TyRef ty, std::string name, ExprPtr init) {
  auto s = make_stmt(Kind::Decl);
  s->decl_ty = std::move(ty);
  s->decl_name = std::move(name);
  s->init = std::move(init);
  return s;
}

StmtPtr Stmt::assign(ExprPtr target, ExprPtr value) {
  auto s = make_stmt(Kind::Assign);
  s->target = std::move(target);
  s->value = std::move(value);
  return s;
}

StmtPtr Stmt::if_stmt(ExprPtr cond, std::vector<StmtPtr> then_body,
                      std::vector<StmtPtr> else_body) {
  auto s = make_stmt(Kind::If);
  s->cond = std::move(cond);
  s->body = std::move(then_body);
  s->else_body = std::move(else_body);
  return s;
}

StmtPtr Stmt::while_stmt(ExprPtr cond, std::vector<StmtPtr> body) {
  auto s = make_stmt(Kind::While);
  s->cond = std::move(cond);
  s->body = std::move(body);
  return s;
}

StmtPtr Stmt::for_stmt(StmtPtr init, ExprPtr cond, StmtPtr step,
                       std::vector<StmtPtr> body) {
  auto s = make_stmt(Kind::For);
  s->for_init = std::move(init);
  s->cond = std::move(cond);
  s->for_step = std::move(step);
  s->body = std::move(body);
  return s;
}

StmtPtr Stmt::return_stmt(ExprPtr e) {
  auto s = make_stmt(Kind::Return);
  s->expr = std::move(e);
  return s;
}

StmtPtr Stmt::expr_stmt(ExprPtr e) {
  auto s = make_stmt(Kind::ExprStmt);
  s->expr = std::move(e);
  return s;
}

StmtPtr clone(const Stmt& s) {
  auto out = std::make_unique<Stmt>();
  out->kind = s.kind;
  out->line = s.line;
  out->col = s.col;
  out->decl_ty = s.decl_ty;
  out->decl_name = s.decl_name;
  if (s.init) out->init = clone(*s.init);
  if (s.target) out->target = clone(*s.target);
  if (s.value) out->value = clone(*s.value);
  if (s.cond) out->cond = clone(*s.cond);
  for (const auto& st : s.body) out->body.push_back(clone(*st));
  for (const auto& st : s.else_body) out->else_body.push_back(clone(*st));
  if (s.for_init) out->for_init = clone(*s.for_init);
  if (s.for_step) out->for_step = clone(*s.for_step);
  if (s.expr) out->expr = clone(*s.expr);
  out->ambig_name = s.ambig_name;
  return out;
}

static bool block_equal(const std::vector<StmtPtr>& a,
                        const std::vector<StmtPtr>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!stmt_equal(*a[i], *b[i])) return false;
  return true;
}

bool stmt_equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Stmt::Kind::Decl:
      if (!ty_equal(a.decl_ty, b.decl_ty) || a.decl_name != b.decl_name)
        return false;
      if (!a.init != !b.init) return false;
      return !a.init || expr_equal(*a.init, *b.init);
    case Stmt::Kind::Assign:
      return expr_equal(*a.target, *b.target) && expr_equal(*a.value, *b.value);
    case Stmt::Kind::If:
      return expr_equal(*a.cond, *b.cond) && block_equal(a.body, b.body) &&
             block_equal(a.else_body, b.else_body);
    case Stmt::Kind::While:
      return expr_equal(*a.cond, *b.cond) && block_equal(a.body, b.body);
    case Stmt::Kind::For:
      return stmt_equal(*a.for_init, *b.for_init) &&
             expr_equal(*a.cond, *b.cond) &&
             stmt_equal(*a.for_step, *b.for_step) && block_equal(a.body, b.body);
    case Stmt::Kind::Return:
      if (!a.expr != !b.expr) return false;
      return !a.expr || expr_equal(*a.expr, *b.expr);
    case Stmt::Kind::ExprStmt:
      return expr_equal(*a.expr, *b.expr);
    case Stmt::Kind::AmbigDecl:
      return a.ambig_name == b.ambig_name && a.decl_name == b.decl_name;
  }
  return false;
}

Ast clone(const Ast& a) {
  Ast out;
  out.name = a.name;
  out.params = a.params;
  out.ret = a.ret;
  for (const auto& s : a.body) out.body.push_back(clone(*s));
  out.typedefs = a.typedefs;
  out.externs = a.externs;
  return out;
}

bool ast_equal(const Ast& a, const Ast& b) {
  if (a.name != b.name || a.params.size() != b.params.size()) return false;
  for (size_t i = 0; i < a.params.size(); ++i) {
    if (a.params[i].first != b.params[i].first) return false;
    if (!ty_equal(a.params[i].second, b.params[i].second)) return false;
  }
  if (!ty_equal(a.ret, b.ret)) return false;
  if (a.typedefs.size() != b.typedefs.size()) return false;
  for (size_t i = 0; i < a.typedefs.size(); ++i) {
    if (a.typedefs[i].name != b.typedefs[i].name) return false;
    if (!ty_equal(a.typedefs[i].ty, b.typedefs[i].ty)) return false;
  }
  if (a.externs.size() != b.externs.size()) return false;
  for (size_t i = 0; i < a.externs.size(); ++i) {
    const auto& x = a.externs[i];
    const auto& y = b.externs[i];
    if (x.name != y.name || x.params.size() != y.params.size()) return false;
    for (size_t j = 0; j < x.params.size(); ++j)
      if (!ty_equal(x.params[j], y.params[j])) return false;
    if (!ty_equal(x.ret, y.ret)) return false;
  }
  return block_equal(a.body, b.body);
}

bool is_comparison(BinOp op) {
  switch (op) {
    case BinOp::Lt: case BinOp::Le: case BinOp::Gt:
    case BinOp::Ge: case BinOp::Eq: case BinOp::Ne:
      return true;
    default:
      return false;
  }
}

bool is_logical(BinOp op) { return op == BinOp::And || op == BinOp::Or; }

const char* binop_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

}  // namespace declab::minic
