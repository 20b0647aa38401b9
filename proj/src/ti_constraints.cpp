#include "declab/ti/ti.hpp"

namespace declab::ti {

namespace {

using minic::Ast;
using minic::BinOp;
using minic::Expr;
using minic::Stmt;
using minic::StmtPtr;
using minic::Ty;
using minic::TyRef;
using minic::UnOp;

TermRef make_term(Term::Kind k) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  return t;
}

}  // namespace

TermRef Term::t_int() {
  static const TermRef t = make_term(Kind::Int);
  return t;
}
TermRef Term::t_float() {
  static const TermRef t = make_term(Kind::Float);
  return t;
}
TermRef Term::t_void() {
  static const TermRef t = make_term(Kind::Void);
  return t;
}
TermRef Term::ptr(TermRef elem) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Ptr;
  t->elem = std::move(elem);
  return t;
}
TermRef Term::func(std::vector<TermRef> params, TermRef ret) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Func;
  t->params = std::move(params);
  t->ret = std::move(ret);
  return t;
}
TermRef Term::var_term(int id) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Var;
  t->var = id;
  return t;
}

std::string term_to_string(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Int: return "int";
    case Term::Kind::Float: return "double";
    case Term::Kind::Void: return "void";
    case Term::Kind::Ptr: return term_to_string(*t.elem) + " *";
    case Term::Kind::Func: {
      std::string s = "fn(";
      for (size_t i = 0; i < t.params.size(); ++i) {
        if (i) s += ", ";
        s += term_to_string(*t.params[i]);
      }
      s += ") -> ";
      s += term_to_string(*t.ret);
      return s;
    }
    case Term::Kind::Var: return "'t" + std::to_string(t.var);
  }
  return "?";
}

namespace {

struct GenFail {
  std::string msg;
};

class ConstraintGen {
 public:
  explicit ConstraintGen(Analysis& out) : out_(out) {}

  void run(const Ast& ast) {
    for (const auto& td : ast.typedefs) typedefs_[td.name] = from_ty(td.ty);
    for (const auto& ex : ast.externs) {
      std::vector<TermRef> ps;
      for (const auto& p : ex.params) ps.push_back(from_ty(p));
      externs_[ex.name] = Term::func(std::move(ps), from_ty(ex.ret));
    }
    ret_ = from_ty(ast.ret);
    for (const auto& p : ast.params) env_[p.first] = from_ty(p.second);
    for (const auto& s : ast.body) gen_stmt(*s);
  }

 private:
  Analysis& out_;
  std::map<std::string, TermRef> typedefs_;
  std::map<std::string, TermRef> externs_;
  std::map<std::string, TermRef> env_;
  TermRef ret_;

  TermRef fresh() { return Term::var_term(out_.n_vars++); }

  TermRef unknown_var(const std::string& name) {
    auto it = out_.unknowns.find(name);
    if (it != out_.unknowns.end()) return it->second;
    TermRef v = fresh();
    out_.unknowns[name] = v;
    out_.unknown_order.push_back(name);
    return v;
  }

  void add(TermRef a, TermRef b, int line, int col) {
    out_.constraints.push_back({std::move(a), std::move(b), line, col});
  }

  TermRef from_ty(const TyRef& t) {
    switch (t->kind) {
      case Ty::Kind::Int: return Term::t_int();
      case Ty::Kind::Float: return Term::t_float();
      case Ty::Kind::Void: return Term::t_void();
      case Ty::Kind::Ptr: return Term::ptr(from_ty(t->elem));
      case Ty::Kind::Alias: {
        TyRef under = minic::resolve(t);
        if (under && under->kind != Ty::Kind::Alias) return from_ty(under);
        auto it = typedefs_.find(t->alias_name);
        if (it != typedefs_.end()) return it->second;
        out_.used_as_type.insert(t->alias_name);
        return unknown_var(t->alias_name);
      }
      case Ty::Kind::Func: {
        std::vector<TermRef> ps;
        for (const auto& p : t->params) ps.push_back(from_ty(p));
        return Term::func(std::move(ps), from_ty(t->ret));
      }
    }
    throw GenFail{"unrepresentable type"};
  }

  void gen_block(const std::vector<StmtPtr>& body) {
    for (const auto& s : body) gen_stmt(*s);
  }

  void gen_stmt(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Decl: {
        TermRef t = from_ty(s.decl_ty);
        if (s.init) add(t, gen_expr(*s.init), s.line, s.col);
        env_[s.decl_name] = t;
        return;
      }
      case Stmt::Kind::Assign:
        add(gen_expr(*s.target), gen_expr(*s.value), s.line, s.col);
        return;
      case Stmt::Kind::If:
        add(gen_expr(*s.cond), Term::t_int(), s.line, s.col);
        gen_block(s.body);
        gen_block(s.else_body);
        return;
      case Stmt::Kind::While:
        add(gen_expr(*s.cond), Term::t_int(), s.line, s.col);
        gen_block(s.body);
        return;
      case Stmt::Kind::For:
        gen_stmt(*s.for_init);
        add(gen_expr(*s.cond), Term::t_int(), s.line, s.col);
        gen_stmt(*s.for_step);
        gen_block(s.body);
        return;
      case Stmt::Kind::Return:
        if (s.expr) add(ret_, gen_expr(*s.expr), s.line, s.col);
        return;
      case Stmt::Kind::ExprStmt:
        gen_expr(*s.expr);
        return;
      case Stmt::Kind::AmbigDecl:
        throw GenFail{"unresolved ambiguous declaration"};
    }
  }

  TermRef gen_expr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit: return Term::t_int();
      case Expr::Kind::FloatLit: return Term::t_float();
      case Expr::Kind::StringLit: return Term::ptr(Term::t_int());
      case Expr::Kind::Var: {
        auto it = env_.find(e.name);
        if (it != env_.end()) return it->second;
        out_.used_as_value.insert(e.name);
        return unknown_var(e.name);
      }
      case Expr::Kind::Unary: {
        TermRef t = gen_expr(*e.lhs);
        if (e.un_op == UnOp::Not) {
          add(t, Term::t_int(), e.line, e.col);
          return Term::t_int();
        }
        return t;  // negation preserves the operand type
      }
      case Expr::Kind::Binary: {
        TermRef l = gen_expr(*e.lhs);
        TermRef r = gen_expr(*e.rhs);
        if (minic::is_logical(e.bin_op)) {
          add(l, Term::t_int(), e.line, e.col);
          add(r, Term::t_int(), e.line, e.col);
          return Term::t_int();
        }
        if (minic::is_comparison(e.bin_op)) {
          add(l, r, e.line, e.col);
          return Term::t_int();
        }
        if (e.bin_op == BinOp::Mod) {
          add(l, Term::t_int(), e.line, e.col);
          add(r, Term::t_int(), e.line, e.col);
          return Term::t_int();
        }
        add(l, r, e.line, e.col);
        return l;
      }
      case Expr::Kind::Index: {
        TermRef base = gen_expr(*e.lhs);
        TermRef idx = gen_expr(*e.rhs);
        TermRef elem = fresh();
        add(base, Term::ptr(elem), e.line, e.col);
        add(idx, Term::t_int(), e.line, e.col);
        return elem;
      }
      case Expr::Kind::Deref: {
        TermRef base = gen_expr(*e.lhs);
        TermRef elem = fresh();
        add(base, Term::ptr(elem), e.line, e.col);
        return elem;
      }
      case Expr::Kind::AddrOf: {
        auto it = env_.find(e.name);
        if (it != env_.end()) return Term::ptr(it->second);
        out_.used_as_value.insert(e.name);
        return Term::ptr(unknown_var(e.name));
      }
      case Expr::Kind::Cast: {
        gen_expr(*e.lhs);  // operand constraints only; scalar-ness is the
        return from_ty(e.cast_ty);  // strict checker's business
      }
      case Expr::Kind::Call: {
        std::vector<TermRef> args;
        for (const auto& a : e.args) args.push_back(gen_expr(*a));
        TermRef res = fresh();
        TermRef fn;
        auto ex = externs_.find(e.name);
        if (ex != externs_.end()) {
          fn = ex->second;
        } else if (auto lv = env_.find(e.name); lv != env_.end()) {
          fn = lv->second;  // calling a variable: let unification object
        } else {
          out_.used_as_func.insert(e.name);
          fn = unknown_var(e.name);
        }
        add(fn, Term::func(std::move(args), res), e.line, e.col);
        return res;
      }
      case Expr::Kind::Ambig:
        throw GenFail{"unresolved ambiguous expression"};
    }
    throw GenFail{"unrepresentable expression"};
  }
};

}  // namespace

bool generate_constraints(const Ast& ast, Analysis& out, std::string& err) {
  try {
    ConstraintGen gen(out);
    gen.run(ast);
    return true;
  } catch (const GenFail& f) {
    err = f.msg;
    return false;
  }
}

}  // namespace declab::ti
