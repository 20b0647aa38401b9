#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "declab/minic/check.hpp"
#include "declab/minic/features.hpp"
#include "declab/minic/interp.hpp"
#include "declab/minic/lexer.hpp"
#include "declab/minic/parse.hpp"
#include "declab/minic/print.hpp"

using namespace declab::minic;

namespace {

Inputs no_inputs() { return {}; }

Inputs one_int(int32_t v) {
  Inputs in;
  in.scalars.push_back(Value::of_int(v));
  return in;
}

Inputs one_buffer(std::vector<int32_t> cells) {
  Inputs in;
  std::vector<Value> buf;
  for (int32_t c : cells) buf.push_back(Value::of_int(c));
  in.buffers.push_back(std::move(buf));
  return in;
}

}  // namespace

TEST_CASE("minimal function parses") {
  Ast a = parse_function("int f(int a){return a+1;}");
  CHECK(a.name == "f");
  REQUIRE(a.params.size() == 1);
  CHECK(a.params[0].first == "a");
  CHECK(resolve(a.params[0].second)->kind == Ty::Kind::Int);
  CHECK(resolve(a.ret)->kind == Ty::Kind::Int);
  REQUIRE(a.body.size() == 1);
  CHECK(a.body[0]->kind == Stmt::Kind::Return);
}

TEST_CASE("non-void return without a value is a type error") {
  CHECK_THROWS_AS(parse_function("int f(){return;}"), Diag);
  try {
    parse_function("int f(){return;}");
  } catch (const Diag& d) {
    CHECK(d.kind == Diag::Kind::Type);
  }
}

TEST_CASE("pointer update function round-trips through the printer") {
  const char* text = "int f(int*p){p[0]=p[0]*2; return p[0];}";
  Ast a = parse_function(text);
  REQUIRE(a.body.size() == 2);
  CHECK(a.body[0]->kind == Stmt::Kind::Assign);
  CHECK(a.body[0]->target->kind == Expr::Kind::Index);
  std::string canon = pretty_print(a);
  Ast b = parse_function(canon);
  CHECK(ast_equal(a, b));
  CHECK(pretty_print(b) == canon);
}

TEST_CASE("canonical text of the minimal function is frozen") {
  Ast a = parse_function("int f(int a){return a+1;}");
  CHECK(pretty_print(a) == "int f(int a) {\n  return a + 1;\n}\n");
}

TEST_CASE("printer is idempotent across a mixed corpus") {
  const char* sources[] = {
      "int f(int a){return a+1;}",
      "int f(int *p){p[0] = p[0]*2; return p[0];}",
      "double g(double x, double y){return x*y + 1.5;}",
      "int h(int a, int b){int c = 0; if(a < b){c = a;}else{c = b;} return c;}",
      "int s(int *p, int n){int t = 0; for(int i = 0; i < n; i = i + 1){t = t + p[i];} return t;}",
      "void w(int *p){while(p[0] > 0){p[0] = p[0] - 1;}}",
      "int c(double x){return (int)x;}",
      "double d(int k){return (double)k / 2.0;}",
      "int l(int a, int b){return a && b || !a;}",
      "int addr(int a){int *q = &a; *q = *q + 1; return a;}",
      "typedef int mytype;\nmytype t(mytype x){return x + 1;}",
      "extern int g(double);\nint call(double x){return g(x);}",
  };
  for (const char* s : sources) {
    CAPTURE(s);
    Ast a = parse_function(s);
    std::string once = pretty_print(a);
    Ast b = parse_function(once);
    CHECK(ast_equal(a, b));
    CHECK(pretty_print(b) == once);
  }
}

TEST_CASE("string literal bytes survive printing exactly") {
  Ast a = parse_function("int f(int *p){p[0] = \"a  b\"[1]; return p[0];}");
  std::string canon = pretty_print(a);
  CHECK(canon.find("\"a  b\"") != std::string::npos);
  Ast b = parse_function(canon);
  CHECK(ast_equal(a, b));
}

TEST_CASE("operator precedence and minimal parentheses") {
  Ast a = parse_function("int f(int a, int b, int c){return a + b * c;}");
  std::string canon = pretty_print(a);
  CHECK(canon.find("return a + b * c;") != std::string::npos);

  Ast g = parse_function("int g(int a, int b, int c){return (a + b) * c;}");
  CHECK(pretty_print(g).find("return (a + b) * c;") != std::string::npos);

  Ast h = parse_function("int h(int a, int b){return -(a + b);}");
  CHECK(pretty_print(h).find("return -(a + b);") != std::string::npos);

  Ast s = parse_function("int s(int a, int b, int c){return a - (b - c);}");
  CHECK(pretty_print(s).find("return a - (b - c);") != std::string::npos);

  Ast t = parse_function("int t(int a, int b, int c){return a - b - c;}");
  CHECK(pretty_print(t).find("return a - b - c;") != std::string::npos);
}

TEST_CASE("increment through return value") {
  Ast a = parse_function("int f(int a){return a+1;}");
  Outcome o = interpret(a, one_int(41), 1000);
  CHECK(o.kind == Outcome::Kind::Returned);
  CHECK(o.ret.kind == Value::Kind::Int);
  CHECK(o.ret.i == 42);
}

TEST_CASE("infinite loop hits the step limit") {
  Ast a = parse_function("void f(){while(1){}}");
  Outcome o = interpret(a, no_inputs(), 10000);
  CHECK(o.kind == Outcome::Kind::StepLimit);
  CHECK(o.final_buffers.empty());
}

TEST_CASE("buffer doubling returns the new value and final buffers") {
  Ast a = parse_function("int f(int*p){p[0]=p[0]*2; return p[0];}");
  Outcome o = interpret(a, one_buffer({3}), 1000);
  CHECK(o.kind == Outcome::Kind::Returned);
  CHECK(o.ret.i == 6);
  REQUIRE(o.final_buffers.size() == 1);
  REQUIRE(o.final_buffers[0].size() == 1);
  CHECK(o.final_buffers[0][0].i == 6);
}

TEST_CASE("interpretation is deterministic") {
  Ast a = parse_function(
      "int f(int *p, int n){int t = 0; for(int i = 0; i < n; i = i + 1){t = "
      "t + p[i] * p[i];} return t;}");
  Inputs in = one_buffer({3, 1, 4, 1, 5});
  in.scalars.push_back(Value::of_int(5));
  Outcome a1 = interpret(a, in, 100000);
  Outcome a2 = interpret(a, in, 100000);
  CHECK(a1.kind == a2.kind);
  CHECK(a1.ret.i == a2.ret.i);
  CHECK(a1.steps_used == a2.steps_used);
  CHECK(a1.ret.i == 9 + 1 + 16 + 1 + 25);
}

TEST_CASE("step limits L and L+1 agree when L suffices") {
  Ast a = parse_function(
      "int f(int n){int t = 0; while(n > 0){t = t + n; n = n - 1;} return t;}");
  Outcome full = interpret(a, one_int(7), 1u << 20);
  REQUIRE(full.kind == Outcome::Kind::Returned);
  uint64_t used = full.steps_used;
  Outcome exact = interpret(a, one_int(7), used);
  Outcome plus = interpret(a, one_int(7), used + 1);
  CHECK(exact.kind == Outcome::Kind::Returned);
  CHECK(exact.ret.i == plus.ret.i);
  Outcome minus = interpret(a, one_int(7), used - 1);
  CHECK(minus.kind == Outcome::Kind::StepLimit);
}

TEST_CASE("int arithmetic wraps mod 2^32") {
  Ast a = parse_function("int f(int a){return a + 1;}");
  Outcome o = interpret(a, one_int(INT32_MAX), 100);
  CHECK(o.ret.i == INT32_MIN);

  Ast m = parse_function("int f(int a){return a * a;}");
  Outcome om = interpret(m, one_int(65536), 100);
  CHECK(om.ret.i == 0);

  Ast d = parse_function("int f(int a){return a / -1;}");
  Outcome od = interpret(d, one_int(INT32_MIN), 100);
  CHECK(od.kind == Outcome::Kind::Returned);  // wraps, never a host fault
  CHECK(od.ret.i == INT32_MIN);
}

TEST_CASE("division and modulo by zero trap") {
  Ast a = parse_function("int f(int a){return 10 / a;}");
  Outcome o = interpret(a, one_int(0), 100);
  CHECK(o.kind == Outcome::Kind::Trap);
  CHECK(o.trap == TrapReason::DivByZero);

  Ast m = parse_function("int f(int a){return 10 % a;}");
  Outcome om = interpret(m, one_int(0), 100);
  CHECK(om.kind == Outcome::Kind::Trap);
  CHECK(om.trap == TrapReason::DivByZero);
}

TEST_CASE("out-of-bounds access traps with buffers preserved") {
  Ast a = parse_function("int f(int *p){return p[5];}");
  Outcome o = interpret(a, one_buffer({1, 2, 3}), 100);
  CHECK(o.kind == Outcome::Kind::Trap);
  CHECK(o.trap == TrapReason::OutOfBounds);
  REQUIRE(o.final_buffers.size() == 1);
  CHECK(o.final_buffers[0].size() == 3);
}

TEST_CASE("strict typing rejects implicit conversions") {
  CHECK_THROWS_AS(parse_function("int f(double x){return x;}"), Diag);
  CHECK_THROWS_AS(parse_function("double f(int a){return a + 1.5;}"), Diag);
  CHECK_THROWS_AS(parse_function("int f(double x){if(x){return 1;} return 0;}"),
                  Diag);
  CHECK_THROWS_AS(parse_function("int f(double x){return x % 2.0;}"), Diag);
  CHECK_THROWS_AS(parse_function("int f(double x){return !x;}"), Diag);
  // Explicit casts make the same shapes legal.
  CHECK_NOTHROW(parse_function("int f(double x){return (int)x;}"));
  CHECK_NOTHROW(parse_function("double f(int a){return (double)a + 1.5;}"));
}

TEST_CASE("casts convert deterministically") {
  Ast a = parse_function("int f(double x){return (int)x;}");
  Inputs in;
  in.scalars.push_back(Value::of_float(3.9));
  CHECK(interpret(a, in, 100).ret.i == 3);
  in.scalars[0] = Value::of_float(-3.9);
  CHECK(interpret(a, in, 100).ret.i == -3);
  in.scalars[0] = Value::of_float(0.0 / 0.0);  // NaN
  CHECK(interpret(a, in, 100).ret.i == 0);
  in.scalars[0] = Value::of_float(1e300);
  CHECK(interpret(a, in, 100).ret.i == INT32_MAX);
  in.scalars[0] = Value::of_float(-1e300);
  CHECK(interpret(a, in, 100).ret.i == INT32_MIN);

  Ast b = parse_function("double g(int a){return (double)a;}");
  Outcome o = interpret(b, one_int(-7), 100);
  CHECK(o.ret.f == -7.0);
}

TEST_CASE("logical operators short-circuit") {
  Ast a = parse_function("int f(int a){return a && 10 / a;}");
  CHECK(interpret(a, one_int(0), 100).ret.i == 0);  // rhs never runs
  CHECK(interpret(a, one_int(2), 100).ret.i == 1);

  Ast b = parse_function("int g(int a){return a || 10 / a;}");
  CHECK(interpret(b, one_int(3), 100).ret.i == 1);
  Outcome o = interpret(b, one_int(0), 100);
  CHECK(o.kind == Outcome::Kind::Trap);
}

TEST_CASE("address-of a local aliases the variable") {
  Ast a = parse_function(
      "int f(int a){int *q = &a; *q = *q + 1; return a;}");
  CHECK(interpret(a, one_int(41), 100).ret.i == 42);
}

TEST_CASE("string literals act as int buffers") {
  Ast a = parse_function("int f(){return \"AB\"[0];}");
  CHECK(interpret(a, no_inputs(), 100).ret.i == 65);
  Ast n = parse_function("int g(){return \"AB\"[2];}");
  CHECK(interpret(n, no_inputs(), 100).ret.i == 0);  // terminator
}

TEST_CASE("extern calls trap when executed") {
  Ast a = parse_function(
      "extern int g(int);\nint f(int a){if(a > 0){return g(a);} return 0;}");
  CHECK(interpret(a, one_int(0), 100).ret.i == 0);
  Outcome o = interpret(a, one_int(1), 100);
  CHECK(o.kind == Outcome::Kind::Trap);
  CHECK(o.trap == TrapReason::InvalidOp);
}

TEST_CASE("declare-before-use and no-reuse rules") {
  CHECK_THROWS_AS(parse_function("int f(){return x;}"), Diag);
  CHECK_THROWS_AS(parse_function("int f(int a){int a = 1; return a;}"), Diag);
  CHECK_THROWS_AS(parse_function("int f(int a){if(a > 0){return 1;}}"), Diag);
  CHECK_NOTHROW(parse_function(
      "int f(int a){if(a > 0){return 1;} else {return 0;}}"));
}

TEST_CASE("parameter count and identifier length limits") {
  CHECK_NOTHROW(parse_function(
      "int f(int a, int b, int c, int d, int e, int g){return a+b+c+d+e+g;}"));
  CHECK_THROWS_AS(
      parse_function("int f(int a, int b, int c, int d, int e, int g, int h)"
                     "{return a;}"),
      Diag);
  std::string long_name(33, 'x');
  CHECK_THROWS_AS(parse_function("int f(int " + long_name + "){return 0;}"),
                  Diag);
}

TEST_CASE("float literals print in shortest round-trip form") {
  CHECK(format_float(1.5) == "1.5");
  CHECK(format_float(2.0) == "2.0");
  CHECK(format_float(0.1) == "0.1");
  Ast a = parse_function("double f(){return 0.1;}");
  std::string canon = pretty_print(a);
  Ast b = parse_function(canon);
  CHECK(ast_equal(a, b));
  CHECK(interpret(b, no_inputs(), 100).ret.f == 0.1);
}

TEST_CASE("features count parameters, pointers, and lengths") {
  Ast a = parse_function("int f(int a){return a+1;}");
  FeatureVector fa = extract_features(a, "asm text");
  CHECK(fa.num_func_args == 1);
  CHECK(fa.num_pointers == 0);
  CHECK(fa.asm_length == 8);
  CHECK(fa.c_length == pretty_print_function(a).size());

  Ast g = parse_function(
      "int g(int*p,int*q,int n){p[0] = q[0] + n; return p[0];}");
  FeatureVector fg = extract_features(g, "");
  CHECK(fg.num_func_args == 3);
  CHECK(fg.num_pointers == 2);
}

TEST_CASE("partial parse keeps genuine ambiguities") {
  ParsedPartial p = parse_partial_program("int f(int b){(a)*b; return 0;}");
  REQUIRE(p.ast.body.size() == 2);
  REQUIRE(p.ast.body[0]->kind == Stmt::Kind::ExprStmt);
  CHECK(p.ast.body[0]->expr->kind == Expr::Kind::Ambig);
  CHECK(p.ast.body[0]->expr->name == "a");
  REQUIRE(p.unknowns.size() == 1);
  CHECK(p.unknowns[0] == "a");
}

TEST_CASE("a value in scope forces the multiplication reading") {
  ParsedPartial p =
      parse_partial_program("int f(int a, int b){(a)*b; return 0;}");
  REQUIRE(p.ast.body.size() == 2);
  const Expr& e = *p.ast.body[0]->expr;
  CHECK(e.kind == Expr::Kind::Binary);
  CHECK(e.bin_op == BinOp::Mul);
  CHECK(p.unknowns.empty());
}

TEST_CASE("declarator use elsewhere forces the cast reading") {
  ParsedPartial p = parse_partial_program(
      "int f(int *b){mytype q = 0; (mytype)*b; return 0;}");
  REQUIRE(p.ast.body.size() == 3);
  const Expr& e = *p.ast.body[1]->expr;
  CHECK(e.kind == Expr::Kind::Cast);
  CHECK(e.cast_ty->kind == Ty::Kind::Alias);
  CHECK(e.cast_ty->alias_name == "mytype");
}

TEST_CASE("statement-level pointer-or-product ambiguity is kept") {
  ParsedPartial p = parse_partial_program("int f(){a * b; return 0;}");
  REQUIRE(!p.ast.body.empty());
  CHECK(p.ast.body[0]->kind == Stmt::Kind::AmbigDecl);
  CHECK(p.ast.body[0]->ambig_name == "a");
  CHECK(p.ast.body[0]->decl_name == "b");
}

TEST_CASE("strict parsing rejects unknown identifiers in ambiguous spots") {
  CHECK_THROWS_AS(parse_function("int f(int b){(a)*b; return 0;}"), Diag);
  CHECK_THROWS_AS(parse_function("int f(){a * b; return 0;}"), Diag);
}

TEST_CASE("unknown type declarations parse partially") {
  ParsedPartial p = parse_partial_program(
      "mytype f(mytype x){mytype y = x + 1; return y;}");
  CHECK(p.ast.name == "f");
  REQUIRE(p.unknowns.size() == 1);
  CHECK(p.unknowns[0] == "mytype");
  CHECK(p.ast.ret->kind == Ty::Kind::Alias);
  CHECK(p.ast.ret->resolved == nullptr);
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_function("int f(int a) {\n  return a +;\n}\n");
    CHECK(false);
  } catch (const Diag& d) {
    CHECK(d.kind == Diag::Kind::Syntax);
    CHECK(d.line == 2);
    CHECK(d.col > 1);
  }
}

TEST_CASE("unsupported constructs are flagged as such") {
  try {
    parse_function("int f(int **p){return 0;}");
    CHECK(false);
  } catch (const Diag& d) {
    CHECK(d.kind == Diag::Kind::Unsupported);
  }
}
