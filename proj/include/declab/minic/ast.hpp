#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace declab::minic {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

// The scalar universe is deliberately small: 32-bit wrapping ints, 64-bit
// floats (spelled `double` in source), pointers to scalars, function types
// for extern declarations, and named aliases that resolve through typedefs.
struct Ty;
using TyRef = std::shared_ptr<const Ty>;

struct Ty {
  enum class Kind { Int, Float, Void, Ptr, Func, Alias };

  Kind kind = Kind::Int;
  TyRef elem;                   // Ptr
  std::vector<TyRef> params;    // Func
  TyRef ret;                    // Func
  std::string alias_name;       // Alias
  TyRef resolved;               // Alias; null means unresolved

  static TyRef make_int();
  static TyRef make_float();
  static TyRef make_void();
  static TyRef make_ptr(TyRef elem);
  static TyRef make_func(std::vector<TyRef> params, TyRef ret);
  static TyRef make_alias(std::string name, TyRef resolved);
};

// Follows alias links until a concrete type (or an unresolved alias) remains.
TyRef resolve(const TyRef& t);
bool ty_equal(const TyRef& a, const TyRef& b);
bool is_scalar(const TyRef& t);  // Int or Float after resolution
std::string ty_to_string(const TyRef& t);

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class UnOp { Neg, Not };

enum class BinOp {
  Add, Sub, Mul, Div, Mod,
  Lt, Le, Gt, Ge, Eq, Ne,
  And, Or,
};

bool is_comparison(BinOp op);
bool is_logical(BinOp op);
const char* binop_text(BinOp op);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum class Kind {
    IntLit, FloatLit, StringLit, Var,
    Unary, Binary, Index, Deref, AddrOf, Cast, Call,
    Ambig,  // only present in partially-parsed programs
  };

  Kind kind;
  int line = 0, col = 0;

  int32_t int_val = 0;          // IntLit
  double float_val = 0.0;       // FloatLit
  std::string str_val;          // StringLit (raw bytes, no escapes)
  std::string name;             // Var, Call callee, AddrOf target, Ambig ident

  UnOp un_op = UnOp::Neg;
  BinOp bin_op = BinOp::Add;
  ExprPtr lhs, rhs;             // Unary/Deref/Cast use lhs only
  TyRef cast_ty;                // Cast
  std::vector<ExprPtr> args;    // Call

  // Ambig: `(name) <op> rhs` where `name` may be a type or a value.
  // lhs holds the cast reading, rhs holds the value reading.
  // Resolution picks one side; see declab::ti.

  // Filled by the type checker.
  TyRef ty;

  static ExprPtr int_lit(int32_t v);
  static ExprPtr float_lit(double v);
  static ExprPtr string_lit(std::string bytes);
  static ExprPtr var(std::string name);
  static ExprPtr unary(UnOp op, ExprPtr e);
  static ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r);
  static ExprPtr index(ExprPtr base, ExprPtr idx);
  static ExprPtr deref(ExprPtr e);
  static ExprPtr addr_of(std::string name);
  static ExprPtr cast(TyRef ty, ExprPtr e);
  static ExprPtr call(std::string callee, std::vector<ExprPtr> args);
};

ExprPtr clone(const Expr& e);
bool expr_equal(const Expr& a, const Expr& b);

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
  enum class Kind { Decl, Assign, If, While, For, Return, ExprStmt, AmbigDecl };

  Kind kind;
  int line = 0, col = 0;

  // Decl
  TyRef decl_ty;
  std::string decl_name;
  ExprPtr init;                 // optional

  // Assign
  ExprPtr target;               // lvalue: Var, Index, or Deref
  ExprPtr value;

  // If / While / For
  ExprPtr cond;
  std::vector<StmtPtr> body;
  std::vector<StmtPtr> else_body;
  StmtPtr for_init;             // Decl or Assign
  StmtPtr for_step;             // Assign

  // Return / ExprStmt
  ExprPtr expr;                 // null for `return;`

  // AmbigDecl: `name * ident ;` in a partial program — either a pointer
  // declaration (decl reading, in decl_ty/decl_name) or a product
  // expression statement (expr reading, in expr). `name` is the
  // questionable identifier.
  std::string ambig_name;

  static StmtPtr decl(TyRef ty, std::string name, ExprPtr init);
  static StmtPtr assign(ExprPtr target, ExprPtr value);
  static StmtPtr if_stmt(ExprPtr cond, std::vector<StmtPtr> then_body,
                         std::vector<StmtPtr> else_body);
  static StmtPtr while_stmt(ExprPtr cond, std::vector<StmtPtr> body);
  static StmtPtr for_stmt(StmtPtr init, ExprPtr cond, StmtPtr step,
                          std::vector<StmtPtr> body);
  static StmtPtr return_stmt(ExprPtr e);
  static StmtPtr expr_stmt(ExprPtr e);
};

StmtPtr clone(const Stmt& s);
bool stmt_equal(const Stmt& a, const Stmt& b);

// ---------------------------------------------------------------------------
// Declarations and the function definition
// ---------------------------------------------------------------------------

struct TypedefDecl {
  std::string name;
  TyRef ty;  // Int or Float
};

struct ExternDecl {
  std::string name;
  std::vector<TyRef> params;
  TyRef ret;  // Int, Float, or Void
};

struct Ast {
  std::string name;
  std::vector<std::pair<std::string, TyRef>> params;
  TyRef ret;  // Int, Float, or Void
  std::vector<StmtPtr> body;

  // Context the function was parsed under; not part of the canonical
  // function text but needed for checking and execution.
  std::vector<TypedefDecl> typedefs;
  std::vector<ExternDecl> externs;
};

Ast clone(const Ast& a);
bool ast_equal(const Ast& a, const Ast& b);

}  // namespace declab::minic
