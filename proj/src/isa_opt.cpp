#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "declab/common.hpp"
#include "declab/isa/compile.hpp"
#include "declab/minic/interp.hpp"  // float_to_int

namespace declab::isa {

namespace {

using minic::Ast;
using minic::BinOp;
using minic::Expr;
using minic::ExprPtr;
using minic::Stmt;
using minic::StmtPtr;
using minic::Ty;
using minic::TyRef;
using minic::UnOp;

bool int_lit(const ExprPtr& e, int32_t& v) {
  if (!e || e->kind != Expr::Kind::IntLit) return false;
  v = e->int_val;
  return true;
}

bool float_lit(const ExprPtr& e, double& v) {
  if (!e || e->kind != Expr::Kind::FloatLit) return false;
  v = e->float_val;
  return true;
}

// Replaces `e` with a float literal only when the value survives the
// text round trip (asm immediates cannot spell inf or nan).
void put_float(ExprPtr& e, double v) {
  if (std::isfinite(v)) e = Expr::float_lit(v);
}

// ---------------------------------------------------------------------------
// Constant folding. Never folds an operation that could trap at run time
// (int division by a zero literal stays put) and never manufactures a
// non-finite float literal.
// ---------------------------------------------------------------------------

void fold_expr(ExprPtr& e) {
  if (!e) return;
  fold_expr(e->lhs);
  fold_expr(e->rhs);
  for (auto& a : e->args) fold_expr(a);

  switch (e->kind) {
    case Expr::Kind::Unary: {
      int32_t iv;
      double fv;
      if (int_lit(e->lhs, iv)) {
        if (e->un_op == UnOp::Neg)
          e = Expr::int_lit(wrap32(-static_cast<int64_t>(iv)));
        else
          e = Expr::int_lit(iv == 0 ? 1 : 0);
      } else if (e->un_op == UnOp::Neg && float_lit(e->lhs, fv)) {
        put_float(e, -fv);
      }
      return;
    }
    case Expr::Kind::Cast: {
      TyRef t = minic::resolve(e->cast_ty);
      int32_t iv;
      double fv;
      if (int_lit(e->lhs, iv)) {
        if (t->kind == Ty::Kind::Int) e = Expr::int_lit(iv);
        else e = Expr::float_lit(static_cast<double>(iv));
      } else if (float_lit(e->lhs, fv)) {
        if (t->kind == Ty::Kind::Int) e = Expr::int_lit(minic::float_to_int(fv));
        else e = Expr::float_lit(fv);
      }
      return;
    }
    case Expr::Kind::Binary: break;
    default: return;
  }

  BinOp op = e->bin_op;
  int32_t li, ri;
  double lf, rf;
  bool l_int = int_lit(e->lhs, li), r_int = int_lit(e->rhs, ri);

  if (op == BinOp::And) {
    if (l_int && li == 0) e = Expr::int_lit(0);  // rhs was short-circuited anyway
    else if (l_int && r_int) e = Expr::int_lit(ri != 0 ? 1 : 0);
    return;
  }
  if (op == BinOp::Or) {
    if (l_int && li != 0) e = Expr::int_lit(1);
    else if (l_int && r_int) e = Expr::int_lit(ri != 0 ? 1 : 0);
    return;
  }

  if (l_int && r_int) {
    int64_t a = li, b = ri;
    switch (op) {
      case BinOp::Add: e = Expr::int_lit(wrap32(a + b)); break;
      case BinOp::Sub: e = Expr::int_lit(wrap32(a - b)); break;
      case BinOp::Mul: e = Expr::int_lit(wrap32(a * b)); break;
      case BinOp::Div: if (b != 0) e = Expr::int_lit(wrap32(a / b)); break;
      case BinOp::Mod: if (b != 0) e = Expr::int_lit(wrap32(a % b)); break;
      case BinOp::Lt: e = Expr::int_lit(li < ri ? 1 : 0); break;
      case BinOp::Le: e = Expr::int_lit(li <= ri ? 1 : 0); break;
      case BinOp::Gt: e = Expr::int_lit(li > ri ? 1 : 0); break;
      case BinOp::Ge: e = Expr::int_lit(li >= ri ? 1 : 0); break;
      case BinOp::Eq: e = Expr::int_lit(li == ri ? 1 : 0); break;
      case BinOp::Ne: e = Expr::int_lit(li != ri ? 1 : 0); break;
      default: break;
    }
    return;
  }
  if (float_lit(e->lhs, lf) && float_lit(e->rhs, rf)) {
    switch (op) {
      case BinOp::Add: put_float(e, lf + rf); break;
      case BinOp::Sub: put_float(e, lf - rf); break;
      case BinOp::Mul: put_float(e, lf * rf); break;
      case BinOp::Div: put_float(e, lf / rf); break;
      case BinOp::Lt: e = Expr::int_lit(lf < rf ? 1 : 0); break;
      case BinOp::Le: e = Expr::int_lit(lf <= rf ? 1 : 0); break;
      case BinOp::Gt: e = Expr::int_lit(lf > rf ? 1 : 0); break;
      case BinOp::Ge: e = Expr::int_lit(lf >= rf ? 1 : 0); break;
      case BinOp::Eq: e = Expr::int_lit(lf == rf ? 1 : 0); break;
      case BinOp::Ne: e = Expr::int_lit(lf != rf ? 1 : 0); break;
      default: break;
    }
  }
}

void fold_block(std::vector<StmtPtr>& body);

void fold_stmt(Stmt& s) {
  fold_expr(s.init);
  fold_expr(s.target);
  fold_expr(s.value);
  fold_expr(s.cond);
  if (s.for_init) fold_stmt(*s.for_init);
  if (s.for_step) fold_stmt(*s.for_step);
  fold_expr(s.expr);
  fold_block(s.body);
  fold_block(s.else_body);
}

void fold_block(std::vector<StmtPtr>& body) {
  for (auto& s : body) fold_stmt(*s);
}

// ---------------------------------------------------------------------------
// Branch simplification: literal conditions select a branch at compile
// time. A `while (k)` with k != 0 is kept — it really loops forever.
// ---------------------------------------------------------------------------

void simplify_block(std::vector<StmtPtr>& body) {
  std::vector<StmtPtr> out;
  for (auto& s : body) {
    simplify_block(s->body);
    simplify_block(s->else_body);
    int32_t c;
    if (s->kind == Stmt::Kind::If && int_lit(s->cond, c)) {
      auto& taken = (c != 0) ? s->body : s->else_body;
      for (auto& t : taken) out.push_back(std::move(t));
      continue;
    }
    if (s->kind == Stmt::Kind::While && int_lit(s->cond, c) && c == 0)
      continue;
    if (s->kind == Stmt::Kind::For && int_lit(s->cond, c) && c == 0) {
      out.push_back(std::move(s->for_init));  // runs once, then the test fails
      continue;
    }
    out.push_back(std::move(s));
  }
  body = std::move(out);
}

// ---------------------------------------------------------------------------
// Loop unrolling. Handles the decl-form counted loop
//   for (int i = a; i <cmp> b; i = i +/- c) body
// with literal a, b, c, body not writing or address-taking i, and at most
// four iterations. The loop variable is substituted away; declarations
// inside the body are renamed per copy to keep names unique.
// ---------------------------------------------------------------------------

void collect_decl_names(const std::vector<StmtPtr>& body,
                        std::set<std::string>& out) {
  for (const auto& s : body) {
    if (s->kind == Stmt::Kind::Decl) out.insert(s->decl_name);
    if (s->for_init && s->for_init->kind == Stmt::Kind::Decl)
      out.insert(s->for_init->decl_name);
    collect_decl_names(s->body, out);
    collect_decl_names(s->else_body, out);
  }
}

bool expr_mentions_addr(const Expr& e, const std::string& name) {
  if (e.kind == Expr::Kind::AddrOf && e.name == name) return true;
  if (e.lhs && expr_mentions_addr(*e.lhs, name)) return true;
  if (e.rhs && expr_mentions_addr(*e.rhs, name)) return true;
  for (const auto& a : e.args)
    if (expr_mentions_addr(*a, name)) return true;
  return false;
}

bool stmt_disturbs(const Stmt& s, const std::string& name);

bool body_disturbs(const std::vector<StmtPtr>& body, const std::string& name) {
  for (const auto& s : body)
    if (stmt_disturbs(*s, name)) return true;
  return false;
}

bool stmt_disturbs(const Stmt& s, const std::string& name) {
  if (s.kind == Stmt::Kind::Assign && s.target->kind == Expr::Kind::Var &&
      s.target->name == name)
    return true;
  for (const Expr* e : {s.init.get(), s.target.get(), s.value.get(),
                        s.cond.get(), s.expr.get()})
    if (e && expr_mentions_addr(*e, name)) return true;
  if (s.for_init && stmt_disturbs(*s.for_init, name)) return true;
  if (s.for_step && stmt_disturbs(*s.for_step, name)) return true;
  return body_disturbs(s.body, name) || body_disturbs(s.else_body, name);
}

void subst_var(Expr& e, const std::string& name, int32_t value) {
  if (e.lhs) subst_var(*e.lhs, name, value);
  if (e.rhs) subst_var(*e.rhs, name, value);
  for (auto& a : e.args) subst_var(*a, name, value);
  if (e.kind == Expr::Kind::Var && e.name == name) {
    e.kind = Expr::Kind::IntLit;
    e.int_val = value;
    e.name.clear();
  }
}

void subst_var(Stmt& s, const std::string& name, int32_t value) {
  for (Expr* e : {s.init.get(), s.target.get(), s.value.get(), s.cond.get(),
                  s.expr.get()})
    if (e) subst_var(*e, name, value);
  if (s.for_init) subst_var(*s.for_init, name, value);
  if (s.for_step) subst_var(*s.for_step, name, value);
  for (auto& t : s.body) subst_var(*t, name, value);
  for (auto& t : s.else_body) subst_var(*t, name, value);
}

void rename_expr(Expr& e, const std::map<std::string, std::string>& ren) {
  if (e.lhs) rename_expr(*e.lhs, ren);
  if (e.rhs) rename_expr(*e.rhs, ren);
  for (auto& a : e.args) rename_expr(*a, ren);
  if (e.kind == Expr::Kind::Var || e.kind == Expr::Kind::AddrOf) {
    auto it = ren.find(e.name);
    if (it != ren.end()) e.name = it->second;
  }
}

void rename_stmt(Stmt& s, const std::map<std::string, std::string>& ren) {
  if (s.kind == Stmt::Kind::Decl) {
    auto it = ren.find(s.decl_name);
    if (it != ren.end()) s.decl_name = it->second;
  }
  for (Expr* e : {s.init.get(), s.target.get(), s.value.get(), s.cond.get(),
                  s.expr.get()})
    if (e) rename_expr(*e, ren);
  if (s.for_init) rename_stmt(*s.for_init, ren);
  if (s.for_step) rename_stmt(*s.for_step, ren);
  for (auto& t : s.body) rename_stmt(*t, ren);
  for (auto& t : s.else_body) rename_stmt(*t, ren);
}

constexpr int kUnrollMax = 4;
constexpr size_t kMaxIdent = 32;

// Returns the iteration values of the loop variable, or nullopt when the
// loop is not unrollable.
bool trip_values(const Stmt& s, std::vector<int32_t>& vals) {
  const Stmt& init = *s.for_init;
  if (init.kind != Stmt::Kind::Decl || !init.init) return false;
  if (minic::resolve(init.decl_ty)->kind != Ty::Kind::Int) return false;
  int32_t start;
  if (!int_lit(init.init, start)) return false;
  const std::string& ivar = init.decl_name;

  const Expr& cond = *s.cond;
  if (cond.kind != Expr::Kind::Binary || !minic::is_comparison(cond.bin_op))
    return false;
  if (cond.lhs->kind != Expr::Kind::Var || cond.lhs->name != ivar) return false;
  int32_t bound;
  if (!int_lit(cond.rhs, bound)) return false;

  const Stmt& step = *s.for_step;
  if (step.kind != Stmt::Kind::Assign ||
      step.target->kind != Expr::Kind::Var || step.target->name != ivar)
    return false;
  const Expr& sv = *step.value;
  if (sv.kind != Expr::Kind::Binary ||
      (sv.bin_op != BinOp::Add && sv.bin_op != BinOp::Sub))
    return false;
  if (sv.lhs->kind != Expr::Kind::Var || sv.lhs->name != ivar) return false;
  int32_t delta;
  if (!int_lit(sv.rhs, delta)) return false;

  if (body_disturbs(s.body, ivar)) return false;

  auto holds = [&](int32_t i) {
    switch (cond.bin_op) {
      case BinOp::Lt: return i < bound;
      case BinOp::Le: return i <= bound;
      case BinOp::Gt: return i > bound;
      case BinOp::Ge: return i >= bound;
      case BinOp::Eq: return i == bound;
      case BinOp::Ne: return i != bound;
      default: return false;
    }
  };
  int32_t i = start;
  while (holds(i)) {
    if (static_cast<int>(vals.size()) >= kUnrollMax) return false;
    vals.push_back(i);
    int64_t next = (sv.bin_op == BinOp::Add) ? int64_t{i} + delta
                                             : int64_t{i} - delta;
    i = wrap32(next);
  }
  return true;
}

void unroll_block(std::vector<StmtPtr>& body, std::set<std::string>& names) {
  std::vector<StmtPtr> out;
  for (auto& s : body) {
    unroll_block(s->body, names);
    unroll_block(s->else_body, names);
    std::vector<int32_t> vals;
    if (s->kind != Stmt::Kind::For || !trip_values(*s, vals)) {
      out.push_back(std::move(s));
      continue;
    }
    const std::string ivar = s->for_init->decl_name;
    std::set<std::string> inner;
    collect_decl_names(s->body, inner);

    // Per-copy renames must stay unique and within the identifier limit.
    bool ok = true;
    std::vector<std::map<std::string, std::string>> renames(vals.size());
    for (size_t k = 0; k < vals.size() && ok; ++k) {
      for (const auto& n : inner) {
        std::string nn = n + "_u" + std::to_string(k);
        if (nn.size() > kMaxIdent || names.count(nn)) { ok = false; break; }
        renames[k][n] = nn;
      }
    }
    if (!ok) {
      out.push_back(std::move(s));
      continue;
    }
    for (auto& rn : renames)
      for (auto& [from, to] : rn) names.insert(to);

    for (size_t k = 0; k < vals.size(); ++k) {
      for (const auto& st : s->body) {
        StmtPtr copy = minic::clone(*st);
        subst_var(*copy, ivar, vals[k]);
        rename_stmt(*copy, renames[k]);
        out.push_back(std::move(copy));
      }
    }
  }
  body = std::move(out);
}

// ---------------------------------------------------------------------------
// Copy propagation, straight-line only. Tracks var -> var/number copies
// within a statement list and substitutes reads; any control flow clears
// the tracked set. Address-taken variables never participate (a store
// through a pointer may change them), and string literals are never
// propagated (they name mutable segments).
// ---------------------------------------------------------------------------

struct CopyProp {
  const std::set<std::string>& addressed;

  std::map<std::string, ExprPtr> copies;

  bool propagatable(const Expr& v) const {
    if (v.kind == Expr::Kind::IntLit || v.kind == Expr::Kind::FloatLit)
      return true;
    return v.kind == Expr::Kind::Var && !addressed.count(v.name);
  }

  void kill(const std::string& x) {
    copies.erase(x);
    for (auto it = copies.begin(); it != copies.end();) {
      if (it->second->kind == Expr::Kind::Var && it->second->name == x)
        it = copies.erase(it);
      else
        ++it;
    }
  }

  void subst(ExprPtr& e) {
    if (!e) return;
    if (e->kind == Expr::Kind::Var) {
      auto it = copies.find(e->name);
      if (it != copies.end()) e = minic::clone(*it->second);
      return;
    }
    subst(e->lhs);
    subst(e->rhs);
    for (auto& a : e->args) subst(a);
  }

  void record(const std::string& x, const Expr& v) {
    if (addressed.count(x) || !propagatable(v)) return;
    if (v.kind == Expr::Kind::Var && v.name == x) return;
    copies[x] = minic::clone(v);
  }

  void run(std::vector<StmtPtr>& body) {
    for (auto& s : body) {
      switch (s->kind) {
        case Stmt::Kind::Decl:
          subst(s->init);
          kill(s->decl_name);
          if (s->init) record(s->decl_name, *s->init);
          break;
        case Stmt::Kind::Assign:
          if (s->target->kind == Expr::Kind::Var) {
            subst(s->value);
            kill(s->target->name);
            record(s->target->name, *s->value);
          } else {
            subst(s->target->lhs);
            subst(s->target->rhs);
            subst(s->value);
            // Pointer stores reach only buffers and address-taken
            // variables; neither is ever tracked here.
          }
          break;
        case Stmt::Kind::If: {
          subst(s->cond);
          CopyProp then_cp{addressed, {}};
          then_cp.run(s->body);
          CopyProp else_cp{addressed, {}};
          else_cp.run(s->else_body);
          copies.clear();
          break;
        }
        case Stmt::Kind::While: {
          copies.clear();  // the condition re-runs after body mutations
          CopyProp cp{addressed, {}};
          cp.run(s->body);
          break;
        }
        case Stmt::Kind::For: {
          if (s->for_init->kind == Stmt::Kind::Decl) {
            subst(s->for_init->init);
          } else if (s->for_init->target &&
                     s->for_init->target->kind == Expr::Kind::Var) {
            subst(s->for_init->value);
          }
          copies.clear();
          CopyProp cp{addressed, {}};
          cp.run(s->body);
          break;
        }
        case Stmt::Kind::Return:
        case Stmt::Kind::ExprStmt:
          subst(s->expr);
          break;
        case Stmt::Kind::AmbigDecl:
          break;
      }
    }
  }
};

void collect_addressed(const Expr& e, std::set<std::string>& out) {
  if (e.kind == Expr::Kind::AddrOf) out.insert(e.name);
  if (e.lhs) collect_addressed(*e.lhs, out);
  if (e.rhs) collect_addressed(*e.rhs, out);
  for (const auto& a : e.args) collect_addressed(*a, out);
}

void collect_addressed_stmt(const Stmt& s, std::set<std::string>& out) {
  for (const Expr* e : {s.init.get(), s.target.get(), s.value.get(),
                        s.cond.get(), s.expr.get()})
    if (e) collect_addressed(*e, out);
  if (s.for_init) collect_addressed_stmt(*s.for_init, out);
  if (s.for_step) collect_addressed_stmt(*s.for_step, out);
  for (const auto& t : s.body) collect_addressed_stmt(*t, out);
  for (const auto& t : s.else_body) collect_addressed_stmt(*t, out);
}

void collect_addressed(const std::vector<StmtPtr>& body,
                       std::set<std::string>& out) {
  for (const auto& s : body) collect_addressed_stmt(*s, out);
}

// ---------------------------------------------------------------------------
// Dead-store elimination. First drops assignments to variables that are
// never read (when the right-hand side cannot trap), then drops
// declarations whose names no longer occur anywhere.
// ---------------------------------------------------------------------------

void collect_reads(const Expr& e, bool is_store_target,
                   std::set<std::string>& out) {
  if (e.kind == Expr::Kind::Var && !is_store_target) out.insert(e.name);
  if (e.kind == Expr::Kind::AddrOf) out.insert(e.name);  // escapes
  if (e.lhs) collect_reads(*e.lhs, false, out);
  if (e.rhs) collect_reads(*e.rhs, false, out);
  for (const auto& a : e.args) collect_reads(*a, false, out);
}

void collect_reads_stmt(const Stmt& s, std::set<std::string>& out) {
  if (s.init) collect_reads(*s.init, false, out);
  if (s.target) collect_reads(*s.target, /*is_store_target=*/true, out);
  if (s.value) collect_reads(*s.value, false, out);
  if (s.cond) collect_reads(*s.cond, false, out);
  if (s.expr) collect_reads(*s.expr, false, out);
  if (s.for_init) collect_reads_stmt(*s.for_init, out);
  if (s.for_step) collect_reads_stmt(*s.for_step, out);
  for (const auto& t : s.body) collect_reads_stmt(*t, out);
  for (const auto& t : s.else_body) collect_reads_stmt(*t, out);
}

void collect_reads(const std::vector<StmtPtr>& body,
                   std::set<std::string>& out) {
  for (const auto& s : body) collect_reads_stmt(*s, out);
}

bool trap_free(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::IntLit:
    case Expr::Kind::FloatLit:
    case Expr::Kind::StringLit:
    case Expr::Kind::Var:
    case Expr::Kind::AddrOf:
      return true;
    case Expr::Kind::Unary:
    case Expr::Kind::Cast:
      return trap_free(*e.lhs);
    case Expr::Kind::Binary: {
      if (e.bin_op == BinOp::Div || e.bin_op == BinOp::Mod) {
        int32_t v;
        bool safe_int = int_lit(e.rhs, v) && v != 0;
        bool is_float = e.rhs->kind == Expr::Kind::FloatLit;
        if (!safe_int && !is_float) return false;
      }
      return trap_free(*e.lhs) && trap_free(*e.rhs);
    }
    default:
      return false;  // Index, Deref, Call, Ambig
  }
}

// Occurrences of a name anywhere (reads, writes, address-of).
void collect_mentions(const std::vector<StmtPtr>& body,
                      std::map<std::string, int>& out);

void collect_mentions(const Expr& e, std::map<std::string, int>& out) {
  if (e.kind == Expr::Kind::Var || e.kind == Expr::Kind::AddrOf)
    ++out[e.name];
  if (e.lhs) collect_mentions(*e.lhs, out);
  if (e.rhs) collect_mentions(*e.rhs, out);
  for (const auto& a : e.args) collect_mentions(*a, out);
}

void collect_mentions(const Stmt& s, std::map<std::string, int>& out) {
  for (const Expr* e : {s.init.get(), s.target.get(), s.value.get(),
                        s.cond.get(), s.expr.get()})
    if (e) collect_mentions(*e, out);
  if (s.for_init) collect_mentions(*s.for_init, out);
  if (s.for_step) collect_mentions(*s.for_step, out);
  collect_mentions(s.body, out);
  collect_mentions(s.else_body, out);
}

void collect_mentions(const std::vector<StmtPtr>& body,
                      std::map<std::string, int>& out) {
  for (const auto& s : body) collect_mentions(*s, out);
}

void drop_dead_assigns(std::vector<StmtPtr>& body,
                       const std::set<std::string>& read) {
  std::vector<StmtPtr> out;
  for (auto& s : body) {
    drop_dead_assigns(s->body, read);
    drop_dead_assigns(s->else_body, read);
    if (s->kind == Stmt::Kind::Assign && s->target->kind == Expr::Kind::Var &&
        !read.count(s->target->name) && trap_free(*s->value)) {
      continue;
    }
    out.push_back(std::move(s));
  }
  body = std::move(out);
}

void drop_dead_decls(std::vector<StmtPtr>& body,
                     const std::map<std::string, int>& mentions) {
  std::vector<StmtPtr> out;
  for (auto& s : body) {
    drop_dead_decls(s->body, mentions);
    drop_dead_decls(s->else_body, mentions);
    if (s->kind == Stmt::Kind::Decl && !mentions.count(s->decl_name) &&
        (!s->init || trap_free(*s->init))) {
      continue;
    }
    out.push_back(std::move(s));
  }
  body = std::move(out);
}

}  // namespace

minic::Ast optimize_ast(const minic::Ast& ast) {
  Ast work = minic::clone(ast);

  std::set<std::string> names;
  names.insert(work.name);
  for (const auto& p : work.params) names.insert(p.first);
  for (const auto& t : work.typedefs) names.insert(t.name);
  for (const auto& x : work.externs) names.insert(x.name);
  collect_decl_names(work.body, names);

  fold_block(work.body);
  simplify_block(work.body);
  unroll_block(work.body, names);
  fold_block(work.body);
  simplify_block(work.body);

  std::set<std::string> addressed;
  collect_addressed(work.body, addressed);
  CopyProp cp{addressed, {}};
  cp.run(work.body);
  fold_block(work.body);
  simplify_block(work.body);

  std::set<std::string> read = addressed;  // &x keeps x alive
  collect_reads(work.body, read);
  drop_dead_assigns(work.body, read);
  std::map<std::string, int> mentions;
  collect_mentions(work.body, mentions);
  drop_dead_decls(work.body, mentions);

  return work;
}

}  // namespace declab::isa
