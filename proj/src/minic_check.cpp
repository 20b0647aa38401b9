#include "declab/minic/check.hpp"

#include <map>
#include <set>

#include "declab/minic/lexer.hpp"
#include "declab/minic/parse.hpp"

namespace declab::minic {

namespace {

class Checker {
 public:
  explicit Checker(Ast& ast) : ast_(ast) {}

  void run() {
    check_prelude();
    check_signature();
    push_scope();
    for (auto& p : ast_.params) declare(p.first, p.second, 0, 0);
    bool returns = check_block_in_place(ast_.body);
    pop_scope();
    if (!is_void(ast_.ret) && !returns)
      throw Diag(Diag::Kind::Type,
                 "non-void function may not fall off the end", 0, 0);
  }

 private:
  Ast& ast_;
  std::map<std::string, TyRef> typedefs_;
  std::map<std::string, const ExternDecl*> externs_;
  std::vector<std::map<std::string, TyRef>> scopes_;
  std::set<std::string> reserved_;  // every name ever declared; no reuse

  [[noreturn]] static void fail(const std::string& msg, int line, int col) {
    throw Diag(Diag::Kind::Type, msg, line, col);
  }

  static bool is_void(const TyRef& t) {
    TyRef r = resolve(t);
    return r && r->kind == Ty::Kind::Void;
  }
  static bool is_int(const TyRef& t) {
    TyRef r = resolve(t);
    return r && r->kind == Ty::Kind::Int;
  }
  static bool is_ptr(const TyRef& t) {
    TyRef r = resolve(t);
    return r && r->kind == Ty::Kind::Ptr;
  }

  void reserve(const std::string& name, int line, int col) {
    if (!reserved_.insert(name).second)
      fail("name '" + name + "' is already in use", line, col);
  }

  void push_scope() { scopes_.emplace_back(); }
  void pop_scope() { scopes_.pop_back(); }

  void declare(const std::string& name, const TyRef& ty, int line, int col) {
    reserve(name, line, col);
    scopes_.back()[name] = ty;
  }

  TyRef lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    return nullptr;
  }

  // A usable value type: scalar, or pointer to scalar.
  void require_object_ty(const TyRef& t, int line, int col) {
    TyRef r = resolve(t);
    if (!r) fail("unknown type name '" + t->alias_name + "'", line, col);
    if (r->kind == Ty::Kind::Int || r->kind == Ty::Kind::Float) return;
    if (r->kind == Ty::Kind::Ptr) {
      TyRef e = resolve(r->elem);
      if (!e) fail("unknown type name '" + r->elem->alias_name + "'", line, col);
      if (e->kind == Ty::Kind::Int || e->kind == Ty::Kind::Float) return;
      fail("pointer element must be int or double", line, col);
    }
    fail("type is not usable for a value here", line, col);
  }

  void check_prelude() {
    for (auto& td : ast_.typedefs) {
      TyRef r = resolve(td.ty);
      if (!r || (r->kind != Ty::Kind::Int && r->kind != Ty::Kind::Float))
        fail("typedef '" + td.name + "' must alias int or double", 0, 0);
      reserve(td.name, 0, 0);
      typedefs_[td.name] = td.ty;
    }
    for (auto& ex : ast_.externs) {
      TyRef r = resolve(ex.ret);
      if (!r) fail("extern '" + ex.name + "' has unknown return type", 0, 0);
      if (r->kind != Ty::Kind::Int && r->kind != Ty::Kind::Float &&
          r->kind != Ty::Kind::Void)
        fail("extern '" + ex.name + "' must return int, double, or void", 0, 0);
      for (auto& p : ex.params) require_object_ty(p, 0, 0);
      reserve(ex.name, 0, 0);
      externs_[ex.name] = &ex;
    }
  }

  void check_signature() {
    TyRef r = resolve(ast_.ret);
    if (!r) fail("unknown return type", 0, 0);
    if (r->kind != Ty::Kind::Int && r->kind != Ty::Kind::Float &&
        r->kind != Ty::Kind::Void)
      fail("function must return int, double, or void", 0, 0);
    reserve(ast_.name, 0, 0);
    if (ast_.params.size() > 6) fail("more than 6 parameters", 0, 0);
    for (auto& p : ast_.params) require_object_ty(p.second, 0, 0);
  }

  // Returns true when the block definitely returns on every path.
  bool check_block_in_place(std::vector<StmtPtr>& body) {
    bool returns = false;
    for (auto& s : body) returns = check_stmt(*s) || returns;
    return returns;
  }

  bool check_block(std::vector<StmtPtr>& body) {
    push_scope();
    bool r = check_block_in_place(body);
    pop_scope();
    return r;
  }

  bool check_stmt(Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Decl: {
        require_object_ty(s.decl_ty, s.line, s.col);
        if (s.init) {
          TyRef it = check_expr(*s.init);
          if (!ty_equal(it, s.decl_ty))
            fail("initializer type does not match declaration", s.line, s.col);
        }
        declare(s.decl_name, s.decl_ty, s.line, s.col);
        return false;
      }
      case Stmt::Kind::Assign: {
        TyRef lt = check_lvalue(*s.target);
        TyRef rt = check_expr(*s.value);
        if (!ty_equal(lt, rt))
          fail("assignment type mismatch", s.line, s.col);
        return false;
      }
      case Stmt::Kind::If: {
        TyRef ct = check_expr(*s.cond);
        if (!is_int(ct)) fail("condition must be int", s.line, s.col);
        bool t = check_block(s.body);
        bool e = s.else_body.empty() ? false : check_block(s.else_body);
        return t && e && !s.else_body.empty();
      }
      case Stmt::Kind::While: {
        TyRef ct = check_expr(*s.cond);
        if (!is_int(ct)) fail("condition must be int", s.line, s.col);
        check_block(s.body);
        return false;
      }
      case Stmt::Kind::For: {
        push_scope();
        check_stmt(*s.for_init);
        TyRef ct = check_expr(*s.cond);
        if (!is_int(ct)) fail("condition must be int", s.line, s.col);
        check_stmt(*s.for_step);
        check_block(s.body);
        pop_scope();
        return false;
      }
      case Stmt::Kind::Return: {
        if (is_void(ast_.ret)) {
          if (s.expr) fail("void function returns a value", s.line, s.col);
        } else {
          if (!s.expr) fail("non-void return missing a value", s.line, s.col);
          TyRef t = check_expr(*s.expr);
          if (!ty_equal(t, ast_.ret))
            fail("return type mismatch", s.line, s.col);
        }
        return true;
      }
      case Stmt::Kind::ExprStmt:
        check_expr(*s.expr);
        return false;
      case Stmt::Kind::AmbigDecl:
        fail("unresolved ambiguous statement", s.line, s.col);
    }
    return false;
  }

  TyRef check_lvalue(Expr& e) {
    if (e.kind != Expr::Kind::Var && e.kind != Expr::Kind::Index &&
        e.kind != Expr::Kind::Deref)
      fail("expression is not assignable", e.line, e.col);
    return check_expr(e);
  }

  TyRef check_expr(Expr& e) {
    TyRef t = check_expr_inner(e);
    e.ty = t;
    return t;
  }

  TyRef check_expr_inner(Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit: return Ty::make_int();
      case Expr::Kind::FloatLit: return Ty::make_float();
      case Expr::Kind::StringLit: return Ty::make_ptr(Ty::make_int());
      case Expr::Kind::Var: {
        TyRef t = lookup(e.name);
        if (!t) fail("undeclared variable '" + e.name + "'", e.line, e.col);
        return t;
      }
      case Expr::Kind::Unary: {
        TyRef t = resolve(check_expr(*e.lhs));
        if (e.un_op == UnOp::Neg) {
          if (t->kind == Ty::Kind::Int) return Ty::make_int();
          if (t->kind == Ty::Kind::Float) return Ty::make_float();
          fail("unary '-' needs int or double", e.line, e.col);
        }
        if (t->kind != Ty::Kind::Int)
          fail("'!' needs an int operand", e.line, e.col);
        return Ty::make_int();
      }
      case Expr::Kind::Binary: {
        TyRef lt = resolve(check_expr(*e.lhs));
        TyRef rt = resolve(check_expr(*e.rhs));
        bool li = lt->kind == Ty::Kind::Int, ri = rt->kind == Ty::Kind::Int;
        bool lf = lt->kind == Ty::Kind::Float, rf = rt->kind == Ty::Kind::Float;
        if (is_logical(e.bin_op)) {
          if (!(li && ri))
            fail("logical operands must be int", e.line, e.col);
          return Ty::make_int();
        }
        if (is_comparison(e.bin_op)) {
          if (!((li && ri) || (lf && rf)))
            fail("comparison operands must both be int or both double",
                 e.line, e.col);
          return Ty::make_int();
        }
        if (e.bin_op == BinOp::Mod) {
          if (!(li && ri)) fail("'%' needs int operands", e.line, e.col);
          return Ty::make_int();
        }
        if (li && ri) return Ty::make_int();
        if (lf && rf) return Ty::make_float();
        fail("arithmetic operands must both be int or both double",
             e.line, e.col);
      }
      case Expr::Kind::Index: {
        TyRef bt = resolve(check_expr(*e.lhs));
        if (bt->kind != Ty::Kind::Ptr)
          fail("indexed expression is not a pointer", e.line, e.col);
        TyRef it = resolve(check_expr(*e.rhs));
        if (it->kind != Ty::Kind::Int)
          fail("array index must be int", e.line, e.col);
        return bt->elem;
      }
      case Expr::Kind::Deref: {
        TyRef t = resolve(check_expr(*e.lhs));
        if (t->kind != Ty::Kind::Ptr)
          fail("dereferenced expression is not a pointer", e.line, e.col);
        return t->elem;
      }
      case Expr::Kind::AddrOf: {
        TyRef t = lookup(e.name);
        if (!t) fail("undeclared variable '" + e.name + "'", e.line, e.col);
        TyRef r = resolve(t);
        if (r->kind != Ty::Kind::Int && r->kind != Ty::Kind::Float)
          fail("'&' needs an int or double variable", e.line, e.col);
        return Ty::make_ptr(t);
      }
      case Expr::Kind::Cast: {
        TyRef target = resolve(e.cast_ty);
        if (!target)
          fail("unknown type name '" + e.cast_ty->alias_name + "'",
               e.line, e.col);
        if (target->kind != Ty::Kind::Int && target->kind != Ty::Kind::Float)
          fail("casts are only between int and double", e.line, e.col);
        TyRef ot = resolve(check_expr(*e.lhs));
        if (ot->kind != Ty::Kind::Int && ot->kind != Ty::Kind::Float)
          fail("cast operand must be int or double", e.line, e.col);
        return e.cast_ty;
      }
      case Expr::Kind::Call: {
        auto it = externs_.find(e.name);
        if (it == externs_.end())
          fail("call to undeclared function '" + e.name + "'", e.line, e.col);
        const ExternDecl& d = *it->second;
        if (e.args.size() != d.params.size())
          fail("wrong number of arguments to '" + e.name + "'", e.line, e.col);
        for (size_t i = 0; i < e.args.size(); ++i) {
          TyRef at = check_expr(*e.args[i]);
          if (!ty_equal(at, d.params[i]))
            fail("argument type mismatch in call to '" + e.name + "'",
                 e.line, e.col);
        }
        return d.ret;
      }
      case Expr::Kind::Ambig:
        fail("unresolved ambiguous expression", e.line, e.col);
    }
    return nullptr;
  }
};

}  // namespace

void check(Ast& ast) { Checker(ast).run(); }

Ast parse_function(std::string_view text) {
  Ast a = parse_program(text);
  check(a);
  return a;
}

}  // namespace declab::minic
