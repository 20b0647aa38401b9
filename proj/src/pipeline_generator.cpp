#include <algorithm>
#include <iterator>
#include <set>

#include "declab/common.hpp"
#include "declab/isa/compile.hpp"
#include "declab/isa/text.hpp"
#include "declab/minic/check.hpp"
#include "declab/minic/interp.hpp"
#include "declab/minic/print.hpp"
#include "declab/pipeline/pipeline.hpp"

namespace declab::pipeline {

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

const char* kFuncNames[] = {"f",    "g",    "h",     "calc", "solve", "apply",
                            "mix",  "fold", "scan",  "probe", "blend", "track"};
const char* kParamNames[] = {"a", "b", "c", "n", "x", "y", "p", "q", "v"};
const char* kLocalNames[] = {"acc", "sum", "tmp", "res", "val", "cur", "lo",
                             "hi"};
const char* kAliasNames[] = {"len_t", "val_t", "num_t", "acc_t", "unit_t",
                             "idx_t"};
const char* kExternNames[] = {"ext_log", "ext_probe", "ext_emit", "ext_sync"};
const char* kStrings[] = {"ok", "err", "sum", "go", "end"};

constexpr int kMaxIndexLiteral = 3;  // stays inside the default test buffers
constexpr int kMaxTrip = 3;
constexpr size_t kMaxAsmChars = 600;

struct Scope {
  Rng* rng = nullptr;
  // names by type; loop counters are readable ints but never assigned to
  std::vector<std::string> ints, floats;
  std::vector<std::string> int_ptrs, float_ptrs;
  std::vector<std::string> store_ptrs;   // pointers writes may go through
  std::vector<std::string> deref_only;   // pointers that must stay at offset 0
  std::vector<std::string> loop_vars;
  std::vector<std::string> all_names;
  Ast* ast = nullptr;
  int depth = 0;  // statement nesting depth

  bool taken(const std::string& n) const {
    return std::find(all_names.begin(), all_names.end(), n) !=
           all_names.end();
  }
  const std::string& pick(const std::vector<std::string>& pool) {
    return pool[static_cast<size_t>(
        rng->uniform_int(0, static_cast<int64_t>(pool.size()) - 1))];
  }
};

ExprPtr gen_int_expr(Scope& sc, int depth);
ExprPtr gen_float_expr(Scope& sc, int depth);

// The parser reads "-4" as negation applied to 4; build the same shape so
// a re-parse of the printed text compiles to identical code.
ExprPtr lit_int(int64_t v) {
  if (v < 0) return Expr::unary(UnOp::Neg, Expr::int_lit(int32_t(-v)));
  return Expr::int_lit(int32_t(v));
}

ExprPtr lit_float(double v) {
  if (v < 0) return Expr::unary(UnOp::Neg, Expr::float_lit(-v));
  return Expr::float_lit(v);
}

ExprPtr gen_index(Scope& sc) {
  if (!sc.loop_vars.empty() && sc.rng->bernoulli(0.45))
    return Expr::var(sc.pick(sc.loop_vars));
  return Expr::int_lit(
      static_cast<int32_t>(sc.rng->uniform_int(0, kMaxIndexLiteral)));
}

bool deref_only_ptr(const Scope& sc, const std::string& name) {
  return std::find(sc.deref_only.begin(), sc.deref_only.end(), name) !=
         sc.deref_only.end();
}

ExprPtr gen_ptr_read(Scope& sc, const std::vector<std::string>& pool) {
  const std::string& p = sc.pick(pool);
  if (deref_only_ptr(sc, p) || sc.rng->bernoulli(0.3))
    return Expr::deref(Expr::var(p));
  return Expr::index(Expr::var(p), gen_index(sc));
}

ExprPtr gen_int_leaf(Scope& sc) {
  double roll = sc.rng->uniform01();
  if (roll < 0.35 || (sc.ints.empty() && sc.int_ptrs.empty())) {
    if (sc.rng->bernoulli(0.25))
      return Expr::int_lit(
          static_cast<int32_t>(sc.rng->uniform_int(10, 99)));
    return lit_int(sc.rng->uniform_int(-9, 9));
  }
  if (roll < 0.85 && !sc.ints.empty()) return Expr::var(sc.pick(sc.ints));
  if (!sc.int_ptrs.empty()) return gen_ptr_read(sc, sc.int_ptrs);
  return Expr::var(sc.pick(sc.ints));
}

ExprPtr gen_float_leaf(Scope& sc) {
  double roll = sc.rng->uniform01();
  if (roll < 0.35 || (sc.floats.empty() && sc.float_ptrs.empty())) {
    double v = static_cast<double>(sc.rng->uniform_int(-20, 20)) / 4.0;
    return lit_float(v);
  }
  if (roll < 0.85 && !sc.floats.empty())
    return Expr::var(sc.pick(sc.floats));
  if (!sc.float_ptrs.empty()) return gen_ptr_read(sc, sc.float_ptrs);
  return Expr::var(sc.pick(sc.floats));
}

ExprPtr gen_int_expr(Scope& sc, int depth) {
  if (depth <= 0 || sc.rng->bernoulli(0.42)) return gen_int_leaf(sc);
  double roll = sc.rng->uniform01();
  if (roll < 0.52) {
    static const BinOp arith[] = {BinOp::Add, BinOp::Sub, BinOp::Mul};
    BinOp op = arith[sc.rng->uniform_int(0, 2)];
    return Expr::binary(op, gen_int_expr(sc, depth - 1),
                        gen_int_expr(sc, depth - 1));
  }
  if (roll < 0.62) {
    // division and remainder keep literal nonzero denominators
    BinOp op = sc.rng->bernoulli(0.5) ? BinOp::Div : BinOp::Mod;
    return Expr::binary(
        op, gen_int_expr(sc, depth - 1),
        Expr::int_lit(static_cast<int32_t>(sc.rng->uniform_int(1, 9))));
  }
  if (roll < 0.78) {
    static const BinOp cmp[] = {BinOp::Lt, BinOp::Le, BinOp::Gt,
                                BinOp::Ge, BinOp::Eq, BinOp::Ne};
    BinOp op = cmp[sc.rng->uniform_int(0, 5)];
    if (sc.rng->bernoulli(0.25))
      return Expr::binary(op, gen_float_expr(sc, depth - 1),
                          gen_float_expr(sc, depth - 1));
    return Expr::binary(op, gen_int_expr(sc, depth - 1),
                        gen_int_expr(sc, depth - 1));
  }
  if (roll < 0.86) {
    BinOp op = sc.rng->bernoulli(0.5) ? BinOp::And : BinOp::Or;
    return Expr::binary(op, gen_int_expr(sc, depth - 1),
                        gen_int_expr(sc, depth - 1));
  }
  if (roll < 0.93) {
    UnOp op = sc.rng->bernoulli(0.6) ? UnOp::Neg : UnOp::Not;
    return Expr::unary(op, gen_int_expr(sc, depth - 1));
  }
  return Expr::cast(Ty::make_int(), gen_float_expr(sc, depth - 1));
}

ExprPtr gen_float_expr(Scope& sc, int depth) {
  if (depth <= 0 || sc.rng->bernoulli(0.42)) return gen_float_leaf(sc);
  double roll = sc.rng->uniform01();
  if (roll < 0.70) {
    static const BinOp arith[] = {BinOp::Add, BinOp::Sub, BinOp::Mul,
                                  BinOp::Div};
    BinOp op = arith[sc.rng->uniform_int(0, 3)];
    return Expr::binary(op, gen_float_expr(sc, depth - 1),
                        gen_float_expr(sc, depth - 1));
  }
  if (roll < 0.80)
    return Expr::unary(UnOp::Neg, gen_float_expr(sc, depth - 1));
  return Expr::cast(Ty::make_float(), gen_int_expr(sc, depth - 1));
}

// A boolean-ish int expression for conditions: biased toward comparisons.
ExprPtr gen_cond(Scope& sc) {
  static const BinOp cmp[] = {BinOp::Lt, BinOp::Le, BinOp::Gt,
                              BinOp::Ge, BinOp::Eq, BinOp::Ne};
  BinOp op = cmp[sc.rng->uniform_int(0, 5)];
  if (sc.rng->bernoulli(0.2) && !sc.floats.empty())
    return Expr::binary(op, gen_float_expr(sc, 1), gen_float_expr(sc, 1));
  return Expr::binary(op, gen_int_expr(sc, 1), gen_int_expr(sc, 1));
}

StmtPtr gen_extern_call(Scope& sc) {
  if (sc.ast->externs.empty()) return nullptr;
  const minic::ExternDecl& ex = sc.ast->externs[0];
  std::vector<ExprPtr> args;
  for (const TyRef& t : ex.params) {
    if (minic::resolve(t)->kind == Ty::Kind::Float)
      args.push_back(gen_float_expr(sc, 1));
    else
      args.push_back(gen_int_expr(sc, 1));
  }
  return Stmt::expr_stmt(Expr::call(ex.name, std::move(args)));
}

StmtPtr gen_assign(Scope& sc, int depth) {
  // candidate shapes: scalar var, buffer store, deref store
  std::vector<int> shapes;
  std::vector<std::string> assignable;
  for (const std::string& n : sc.ints)
    if (std::find(sc.loop_vars.begin(), sc.loop_vars.end(), n) ==
        sc.loop_vars.end())
      assignable.push_back(n);
  std::vector<std::string> fassign = sc.floats;
  if (!assignable.empty()) shapes.push_back(0);
  if (!fassign.empty()) shapes.push_back(1);
  std::vector<std::string> istores, fstores;
  for (const std::string& n : sc.int_ptrs)
    if (std::find(sc.store_ptrs.begin(), sc.store_ptrs.end(), n) !=
        sc.store_ptrs.end())
      istores.push_back(n);
  for (const std::string& n : sc.float_ptrs)
    if (std::find(sc.store_ptrs.begin(), sc.store_ptrs.end(), n) !=
        sc.store_ptrs.end())
      fstores.push_back(n);
  if (!istores.empty()) shapes.push_back(2);
  if (!fstores.empty()) shapes.push_back(3);
  if (shapes.empty()) return nullptr;
  int shape = shapes[static_cast<size_t>(
      sc.rng->uniform_int(0, static_cast<int64_t>(shapes.size()) - 1))];
  switch (shape) {
    case 0:
      return Stmt::assign(Expr::var(sc.pick(assignable)),
                          gen_int_expr(sc, depth));
    case 1:
      return Stmt::assign(Expr::var(sc.pick(fassign)),
                          gen_float_expr(sc, depth));
    case 2: {
      const std::string& p = sc.pick(istores);
      ExprPtr target = deref_only_ptr(sc, p)
                           ? Expr::deref(Expr::var(p))
                           : Expr::index(Expr::var(p), gen_index(sc));
      return Stmt::assign(std::move(target), gen_int_expr(sc, depth));
    }
    default: {
      const std::string& p = sc.pick(fstores);
      ExprPtr target = deref_only_ptr(sc, p)
                           ? Expr::deref(Expr::var(p))
                           : Expr::index(Expr::var(p), gen_index(sc));
      return Stmt::assign(std::move(target), gen_float_expr(sc, depth));
    }
  }
}

ExprPtr gen_ret_expr(Scope& sc, const TyRef& ret) {
  TyRef r = minic::resolve(ret);
  int depth = sc.rng->bernoulli(0.3) ? 2 : 1;
  if (r->kind == Ty::Kind::Float) return gen_float_expr(sc, depth);
  return gen_int_expr(sc, depth);
}

void gen_block(Scope& sc, std::vector<StmtPtr>& out, int budget);

// `for (i = 0; i < K; i = i + 1)` / reset-then-`while (i < K)` over a
// pre-declared counter; the body never writes the counter, so termination
// is structural. Appends directly to `out`.
void gen_loop(Scope& sc, std::vector<StmtPtr>& out) {
  std::string counter = sc.depth == 0 ? "i" : "j";
  if (!sc.taken(counter)) {
    out.push_back(Stmt::decl(Ty::make_int(), counter, Expr::int_lit(0)));
    sc.all_names.push_back(counter);
    sc.ints.push_back(counter);
    sc.loop_vars.push_back(counter);
  }
  int trip = static_cast<int>(sc.rng->uniform_int(2, kMaxTrip));
  std::vector<StmtPtr> body;
  sc.depth += 1;
  StmtPtr a = gen_assign(sc, 1);
  body.push_back(a ? std::move(a) : Stmt::expr_stmt(gen_int_expr(sc, 1)));
  sc.depth -= 1;
  ExprPtr cond =
      Expr::binary(BinOp::Lt, Expr::var(counter), Expr::int_lit(trip));
  if (sc.rng->bernoulli(0.6)) {
    StmtPtr init = Stmt::assign(Expr::var(counter), Expr::int_lit(0));
    StmtPtr step = Stmt::assign(
        Expr::var(counter),
        Expr::binary(BinOp::Add, Expr::var(counter), Expr::int_lit(1)));
    out.push_back(Stmt::for_stmt(std::move(init), std::move(cond),
                                 std::move(step), std::move(body)));
    return;
  }
  body.push_back(Stmt::assign(
      Expr::var(counter),
      Expr::binary(BinOp::Add, Expr::var(counter), Expr::int_lit(1))));
  out.push_back(Stmt::assign(Expr::var(counter), Expr::int_lit(0)));
  out.push_back(Stmt::while_stmt(std::move(cond), std::move(body)));
}

void gen_inner_stmt(Scope& sc, std::vector<StmtPtr>& out) {
  double roll = sc.rng->uniform01();
  if (roll < 0.55) {
    StmtPtr a = gen_assign(sc, 1);
    if (a) {
      out.push_back(std::move(a));
      return;
    }
    roll = 0.9;
  }
  if (roll < 0.75 && sc.depth < 2) {
    std::vector<StmtPtr> then_body, else_body;
    sc.depth += 1;
    gen_block(sc, then_body, 1);
    if (sc.rng->bernoulli(0.35)) gen_block(sc, else_body, 1);
    sc.depth -= 1;
    out.push_back(Stmt::if_stmt(gen_cond(sc), std::move(then_body),
                                std::move(else_body)));
    return;
  }
  if (roll < 0.85 && !sc.ast->externs.empty()) {
    StmtPtr call = gen_extern_call(sc);
    if (call) {
      out.push_back(std::move(call));
      return;
    }
  }
  StmtPtr a = gen_assign(sc, 1);
  if (a)
    out.push_back(std::move(a));
  else
    out.push_back(Stmt::expr_stmt(gen_int_expr(sc, 1)));
}

void gen_block(Scope& sc, std::vector<StmtPtr>& out, int budget) {
  for (int k = 0; k < budget; ++k) gen_inner_stmt(sc, out);
}

std::string fresh_local(Scope& sc) {
  for (const char* cand : kLocalNames)
    if (!sc.taken(cand)) return cand;
  int n = 0;
  while (sc.taken("v" + std::to_string(n))) ++n;
  return "v" + std::to_string(n);
}

// One top-level statement; declarations happen only at the top level so
// scoping stays flat.
void gen_top_stmt(Scope& sc, std::vector<StmtPtr>& out, TyRef alias_ty) {
  double roll = sc.rng->uniform01();
  if (roll < 0.34) {
    std::string name = fresh_local(sc);
    bool flt = sc.rng->bernoulli(0.3);
    TyRef ty = flt ? Ty::make_float() : Ty::make_int();
    if (alias_ty && sc.rng->bernoulli(0.55)) {
      ty = alias_ty;
      flt = minic::resolve(ty)->kind == Ty::Kind::Float;
    }
    ExprPtr init = flt ? gen_float_expr(sc, 1) : gen_int_expr(sc, 1);
    out.push_back(Stmt::decl(ty, name, std::move(init)));
    sc.all_names.push_back(name);
    (flt ? sc.floats : sc.ints).push_back(name);
    return;
  }
  if (roll < 0.40 && !sc.ints.empty() && sc.rng->bernoulli(0.5)) {
    // a pointer alias of a scalar local, used only at offset zero
    std::string target = sc.pick(sc.ints);
    std::string name = fresh_local(sc);
    out.push_back(Stmt::decl(Ty::make_ptr(Ty::make_int()), name,
                             Expr::addr_of(target)));
    sc.all_names.push_back(name);
    sc.int_ptrs.push_back(name);
    sc.store_ptrs.push_back(name);
    sc.deref_only.push_back(name);
    return;
  }
  if (roll < 0.46) {
    // a short read-only string constant
    size_t which = static_cast<size_t>(sc.rng->uniform_int(
        0, static_cast<int64_t>(std::size(kStrings)) - 1));
    std::string name = fresh_local(sc);
    out.push_back(Stmt::decl(Ty::make_ptr(Ty::make_int()), name,
                             Expr::string_lit(kStrings[which])));
    sc.all_names.push_back(name);
    sc.int_ptrs.push_back(name);
    sc.deref_only.push_back(name);  // offset 0 is always in bounds
    return;
  }
  if (roll < 0.66) {
    StmtPtr a = gen_assign(sc, 1);
    if (a) {
      out.push_back(std::move(a));
      return;
    }
  }
  if (roll < 0.80) {
    std::vector<StmtPtr> then_body, else_body;
    sc.depth += 1;
    gen_block(sc, then_body, 1);
    if (sc.rng->bernoulli(0.4)) gen_block(sc, else_body, 1);
    sc.depth -= 1;
    out.push_back(Stmt::if_stmt(gen_cond(sc), std::move(then_body),
                                std::move(else_body)));
    return;
  }
  if (roll < 0.90) {
    gen_loop(sc, out);
    return;
  }
  if (!sc.ast->externs.empty()) {
    StmtPtr call = gen_extern_call(sc);
    if (call) {
      out.push_back(std::move(call));
      return;
    }
  }
  StmtPtr a = gen_assign(sc, 1);
  if (a)
    out.push_back(std::move(a));
  else
    out.push_back(Stmt::expr_stmt(gen_int_expr(sc, 1)));
}

Ast gen_candidate(Rng& rng) {
  Ast ast;
  Scope sc;
  sc.rng = &rng;
  sc.ast = &ast;

  ast.name = kFuncNames[rng.uniform_int(
      0, static_cast<int64_t>(std::size(kFuncNames)) - 1)];
  sc.all_names.push_back(ast.name);

  // optional typedef alias, used for a parameter or local below
  TyRef alias_ty;
  if (rng.bernoulli(0.1)) {
    const char* name = kAliasNames[rng.uniform_int(
        0, static_cast<int64_t>(std::size(kAliasNames)) - 1)];
    TyRef base = rng.bernoulli(0.6) ? Ty::make_int() : Ty::make_float();
    ast.typedefs.push_back({name, base});
    alias_ty = Ty::make_alias(name, base);
    sc.all_names.push_back(name);
  }

  // optional extern declaration (its calls trap, so they model opaque
  // side-effecting helpers)
  if (rng.bernoulli(0.1)) {
    minic::ExternDecl ex;
    ex.name = kExternNames[rng.uniform_int(
        0, static_cast<int64_t>(std::size(kExternNames)) - 1)];
    int nparams = static_cast<int>(rng.uniform_int(0, 2));
    for (int i = 0; i < nparams; ++i)
      ex.params.push_back(rng.bernoulli(0.7) ? Ty::make_int()
                                             : Ty::make_float());
    double r = rng.uniform01();
    ex.ret = r < 0.5 ? Ty::make_void()
                     : (r < 0.85 ? Ty::make_int() : Ty::make_float());
    ast.externs.push_back(std::move(ex));
    sc.all_names.push_back(ast.externs[0].name);
  }

  // signature
  int weights = static_cast<int>(rng.uniform_int(0, 99));
  int nparams = weights < 10 ? 0 : weights < 45 ? 1 : weights < 80 ? 2 : 3;
  bool alias_used = false;
  for (int i = 0; i < nparams; ++i) {
    std::string pname;
    for (const char* cand : kParamNames)
      if (!sc.taken(cand)) {
        pname = cand;
        break;
      }
    if (pname.empty()) pname = "arg" + std::to_string(i);
    double r = rng.uniform01();
    TyRef ty;
    if (r < 0.40) {
      ty = Ty::make_int();
      sc.ints.push_back(pname);
    } else if (r < 0.60) {
      ty = Ty::make_float();
      sc.floats.push_back(pname);
    } else if (r < 0.85) {
      ty = Ty::make_ptr(Ty::make_int());
      sc.int_ptrs.push_back(pname);
      sc.store_ptrs.push_back(pname);
    } else {
      ty = Ty::make_ptr(Ty::make_float());
      sc.float_ptrs.push_back(pname);
      sc.store_ptrs.push_back(pname);
    }
    if (alias_ty && !alias_used &&
        minic::resolve(ty)->kind == minic::resolve(alias_ty)->kind &&
        minic::is_scalar(ty) && rng.bernoulli(0.7)) {
      ty = alias_ty;
      alias_used = true;
    }
    ast.params.emplace_back(pname, ty);
    sc.all_names.push_back(pname);
  }

  double rr = rng.uniform01();
  ast.ret = rr < 0.55 ? Ty::make_int()
                      : (rr < 0.85 ? Ty::make_float() : Ty::make_void());
  if (alias_ty && !alias_used && rng.bernoulli(0.5) &&
      minic::resolve(ast.ret)->kind == minic::resolve(alias_ty)->kind)
    ast.ret = alias_ty;

  int budget = 1 + rng.geometric(0.75, 2);
  for (int k = 0; k < budget; ++k) gen_top_stmt(sc, ast.body, alias_ty);
  if (minic::resolve(ast.ret)->kind == Ty::Kind::Void)
    ast.body.push_back(Stmt::return_stmt(nullptr));
  else
    ast.body.push_back(Stmt::return_stmt(gen_ret_expr(sc, ast.ret)));
  return ast;
}

std::vector<isa::ArgKind> arg_kinds(const Ast& ast) {
  std::vector<isa::ArgKind> kinds;
  for (const auto& [name, ty] : ast.params) {
    TyRef r = minic::resolve(ty);
    if (r->kind == Ty::Kind::Int)
      kinds.push_back(isa::ArgKind::I);
    else if (r->kind == Ty::Kind::Float)
      kinds.push_back(isa::ArgKind::F);
    else if (minic::resolve(r->elem)->kind == Ty::Kind::Int)
      kinds.push_back(isa::ArgKind::PI);
    else
      kinds.push_back(isa::ArgKind::PF);
  }
  return kinds;
}

bool expr_touches_pointer(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::StringLit:
    case Expr::Kind::Index:
    case Expr::Kind::Deref:
    case Expr::Kind::AddrOf:
      return true;
    default:
      break;
  }
  if (e.lhs && expr_touches_pointer(*e.lhs)) return true;
  if (e.rhs && expr_touches_pointer(*e.rhs)) return true;
  for (const ExprPtr& a : e.args)
    if (a && expr_touches_pointer(*a)) return true;
  return false;
}

struct CategoryScan {
  bool loop = false;
  bool pointer = false;
};

void scan_stmt(const Stmt& s, CategoryScan& out);

void scan_stmts(const std::vector<StmtPtr>& body, CategoryScan& out) {
  for (const StmtPtr& s : body)
    if (s) scan_stmt(*s, out);
}

void scan_stmt(const Stmt& s, CategoryScan& out) {
  if (s.kind == Stmt::Kind::While || s.kind == Stmt::Kind::For)
    out.loop = true;
  if (s.decl_ty && minic::resolve(s.decl_ty)->kind == Ty::Kind::Ptr)
    out.pointer = true;
  for (const Expr* e : {s.init.get(), s.target.get(), s.value.get(),
                        s.cond.get(), s.expr.get()})
    if (e && expr_touches_pointer(*e)) out.pointer = true;
  scan_stmts(s.body, out);
  scan_stmts(s.else_body, out);
  if (s.for_init) scan_stmt(*s.for_init, out);
  if (s.for_step) scan_stmt(*s.for_step, out);
}

}  // namespace

std::string categorize(const minic::Ast& ast) {
  CategoryScan scan;
  scan_stmts(ast.body, scan);
  for (const auto& [name, ty] : ast.params)
    if (minic::resolve(ty)->kind == Ty::Kind::Ptr) scan.pointer = true;
  if (scan.loop) return "loop";
  if (scan.pointer) return "pointer";
  return "arith";
}

std::vector<GenFunction> generate_functions(uint64_t seed, int n) {
  if (n < 1) throw GenerationBudgetExceeded("requested count must be >= 1");
  Rng rng(seed);
  std::vector<GenFunction> out;
  std::set<std::string> seen;
  int64_t attempts = 0;
  const int64_t budget = 60ll * n + 1000;
  while (static_cast<int>(out.size()) < n) {
    if (++attempts > budget)
      throw GenerationBudgetExceeded(
          "could not generate " + std::to_string(n) + " unique functions in " +
          std::to_string(budget) + " attempts");
    Ast ast = gen_candidate(rng);
    try {
      minic::check(ast);
    } catch (const std::exception&) {
      continue;
    }
    equiv::EquivConfig icfg;
    icfg.n_tests = 1;
    std::vector<minic::Inputs> zero = equiv::gen_inputs(arg_kinds(ast), icfg);
    minic::Outcome o = minic::interpret(ast, zero[0], 1000000);
    if (o.kind == minic::Outcome::Kind::StepLimit) continue;
    // Every rendering must fit a small model's context window, so the
    // bound applies to the longest of the four (isa, opt) variants.
    bool oversized = false;
    for (isa::IsaId i : {isa::IsaId::REG, isa::IsaId::STK}) {
      for (isa::OptLevel l : {isa::OptLevel::O0, isa::OptLevel::O2}) {
        if (isa::emit_asm(isa::compile(ast, i, l)).size() > kMaxAsmChars) {
          oversized = true;
          break;
        }
      }
      if (oversized) break;
    }
    if (oversized) continue;
    std::string canonical = minic::pretty_print(ast);
    if (!seen.insert(canonical).second) continue;
    GenFunction gf;
    gf.category = categorize(ast);
    gf.ast = std::move(ast);
    gf.canonical = std::move(canonical);
    out.push_back(std::move(gf));
  }
  return out;
}

}  // namespace declab::pipeline
