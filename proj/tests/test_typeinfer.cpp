#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>

#include "declab/minic/parse.hpp"
#include "declab/minic/print.hpp"
#include "declab/ti/ti.hpp"

using namespace declab;
using namespace declab::ti;
using minic::parse_partial_program;
using minic::ParsedPartial;

namespace {

Completion complete(const std::string& s) { return complete_program(s); }

bool completed(const Completion& c) {
  return c.status == Completion::Status::Completed;
}

}  // namespace

// --- partial parsing and the ambiguity lattice ---

TEST_CASE("(a)*b with unknown a keeps both readings") {
  ParsedPartial pp =
      parse_partial_program("int f(int b){(a)*b; return b;}");
  CHECK(count_ambiguities(pp.ast) == 1);
  CHECK(std::count(pp.unknowns.begin(), pp.unknowns.end(), "a") == 1);
}

TEST_CASE("a value declaration in scope forces the multiplication reading") {
  ParsedPartial pp =
      parse_partial_program("int f(int b){int a = 1; return (a)*b;}");
  CHECK(count_ambiguities(pp.ast) == 0);
  CHECK(pp.unknowns.empty());
  Completion c = complete("int f(int b){int a = 1; return (a)*b;}");
  REQUIRE(completed(c));
  CHECK(c.prelude.empty());
  CHECK(c.source == "int f(int b){int a = 1; return (a)*b;}");
}

TEST_CASE("declarator use elsewhere forces the cast reading") {
  ParsedPartial pp = parse_partial_program(
      "int f(mytype x){int *b; (mytype)*b; return (int)x;}");
  CHECK(count_ambiguities(pp.ast) == 0);
  REQUIRE(pp.ast.body.size() == 3);
  REQUIRE(pp.ast.body[1]->kind == minic::Stmt::Kind::ExprStmt);
  CHECK(pp.ast.body[1]->expr->kind == minic::Expr::Kind::Cast);
}

TEST_CASE("statement-level a*b is kept as an ambiguous declaration") {
  ParsedPartial pp = parse_partial_program("int f(){a * b; return 0;}");
  REQUIRE(pp.ast.body.size() == 2);
  CHECK(pp.ast.body[0]->kind == minic::Stmt::Kind::AmbigDecl);
  CHECK(count_ambiguities(pp.ast) == 1);
}

// --- constraint generation ---

TEST_CASE("indexing an unknown pins it to a pointer type") {
  ParsedPartial pp =
      parse_partial_program("int f(){p[0] = 1; return 0;}");
  Analysis an;
  std::string err;
  REQUIRE(generate_constraints(pp.ast, an, err));
  REQUIRE(an.unknowns.count("p"));
  SolveResult sr = solve(an.constraints);
  REQUIRE(sr.ok);
  TermRef g = sr.sub.ground(an.unknowns.at("p"));
  REQUIRE(g->kind == Term::Kind::Ptr);
  CHECK(g->elem->kind == Term::Kind::Int);
  // ...but no prelude can declare a variable, so completion still fails.
  Completion c = complete("int f(){p[0] = 1; return 0;}");
  CHECK(!completed(c));
  CHECK(c.failure == Failure::Unsupported);
}

TEST_CASE("a call against a float argument fixes the extern signature") {
  ParsedPartial pp =
      parse_partial_program("int f(double x){int y = g(x); return y;}");
  Analysis an;
  std::string err;
  REQUIRE(generate_constraints(pp.ast, an, err));
  REQUIRE(an.unknowns.count("g"));
  SolveResult sr = solve(an.constraints);
  REQUIRE(sr.ok);
  TermRef g = sr.sub.ground(an.unknowns.at("g"));
  REQUIRE(g->kind == Term::Kind::Func);
  REQUIRE(g->params.size() == 1);
  CHECK(g->params[0]->kind == Term::Kind::Float);
  CHECK(g->ret->kind == Term::Kind::Int);
}

// --- the solver ---

TEST_CASE("unification grounds simple and chained constraints") {
  TermRef a = Term::var_term(0);
  TermRef b = Term::var_term(1);

  SolveResult one = solve({{a, Term::t_int(), 0, 0}});
  REQUIRE(one.ok);
  CHECK(one.sub.ground(a)->kind == Term::Kind::Int);

  SolveResult two = solve({{a, Term::ptr(b), 0, 0}, {b, Term::t_float(), 0, 0}});
  REQUIRE(two.ok);
  TermRef g = two.sub.ground(a);
  REQUIRE(g->kind == Term::Kind::Ptr);
  CHECK(g->elem->kind == Term::Kind::Float);
}

TEST_CASE("occurs check rejects self-containing types") {
  TermRef a = Term::var_term(0);
  SolveResult sr = solve({{a, Term::ptr(a), 0, 0}});
  CHECK(!sr.ok);
  CHECK(sr.failure == Failure::OccursCheck);
}

TEST_CASE("ground conflicts are reported as type conflicts") {
  TermRef a = Term::var_term(0);
  SolveResult sr =
      solve({{Term::t_int(), Term::ptr(a), 0, 0}});
  CHECK(!sr.ok);
  CHECK(sr.failure == Failure::TypeConflict);
}

TEST_CASE("unconstrained variables default to int only at grounding") {
  TermRef a = Term::var_term(0);
  SolveResult sr = solve({});
  REQUIRE(sr.ok);
  CHECK(sr.sub.walk(a)->kind == Term::Kind::Var);   // still free
  CHECK(sr.sub.ground(a)->kind == Term::Kind::Int); // defaulting is last
}

TEST_CASE("solver output is independent of constraint order") {
  ParsedPartial pp = parse_partial_program(
      "mytype f(mytype x, double y){mytype z = x + 1;"
      " double w = h(y, z); return z;}");
  Analysis an;
  std::string err;
  REQUIRE(generate_constraints(pp.ast, an, err));
  SolveResult fwd = solve(an.constraints);
  std::vector<Constraint> rev(an.constraints.rbegin(), an.constraints.rend());
  SolveResult bwd = solve(rev);
  REQUIRE(fwd.ok);
  REQUIRE(bwd.ok);
  for (const auto& [name, var] : an.unknowns) {
    CAPTURE(name);
    CHECK(term_to_string(*fwd.sub.ground(var)) ==
          term_to_string(*bwd.sub.ground(var)));
  }
}

// --- prelude synthesis ---

TEST_CASE("typedef and extern lines render in first-use order") {
  Completion c = complete(
      "mytype f(mytype x){double d = g(1.5); return x + (int)d;}");
  REQUIRE(completed(c));
  CHECK(c.prelude == "typedef int mytype;\nextern double g(double);\n");
  CHECK(c.source == c.prelude +
                        "mytype f(mytype x){double d = g(1.5); return x + "
                        "(int)d;}");
}

TEST_CASE("synthesized names must not collide with declared ones") {
  Completion c = complete("int f(int mytype){mytype x = 0; return x;}");
  CHECK(!completed(c));
  CHECK(c.failure == Failure::Conflict);
}

// --- complete_program end to end ---

TEST_CASE("a fully typed function passes through unchanged") {
  const char* src =
      "typedef int mytype;\nmytype f(mytype x){return x + 1;}";
  Completion c = complete(src);
  REQUIRE(completed(c));
  CHECK(c.prelude.empty());
  CHECK(c.source == src);
}

TEST_CASE("an unknown alias used as int gets typedef int") {
  Completion c = complete("mytype f(mytype x){return x + 1;}");
  REQUIRE(completed(c));
  CHECK(c.prelude == "typedef int mytype;\n");
  CHECK_NOTHROW(minic::parse_function(c.source));
}

TEST_CASE("an unknown callee gets an extern declaration") {
  Completion c = complete("int f(int a){int y = g(1.5); return y + a;}");
  REQUIRE(completed(c));
  CHECK(c.prelude == "extern int g(double);\n");
  CHECK_NOTHROW(minic::parse_function(c.source));
}

TEST_CASE("conflicting call signatures are unfixable") {
  Completion c = complete(
      "int f(){int y = g(1); int z = g(1.5); return y + z;}");
  CHECK(!completed(c));
  CHECK(c.failure == Failure::TypeConflict);
}

TEST_CASE("self-referential pointer constraints are unfixable") {
  Completion c = complete("int f(){mytype p; p = &p; return 0;}");
  CHECK(!completed(c));
  CHECK(c.failure == Failure::OccursCheck);
}

TEST_CASE("ill-typed hypotheses without unknowns are unfixable") {
  Completion c = complete("int f(int *p){int x = 0; x = p; return x;}");
  CHECK(!completed(c));
  CHECK(c.failure == Failure::TypeConflict);
}

TEST_CASE("hypotheses that do not parse report a syntax failure") {
  Completion c = complete("int f( {");
  CHECK(!completed(c));
  CHECK(c.failure == Failure::Syntax);
}

TEST_CASE("cast reading wins when the value reading cannot be declared") {
  Completion c = complete("int f(int *u){(a)*u; return 0;}");
  REQUIRE(completed(c));
  CHECK(c.prelude == "typedef int a;\n");
  CHECK_NOTHROW(minic::parse_function(c.source));
}

TEST_CASE("ambiguous declaration resolves to a pointer declaration") {
  Completion c = complete("int f(){a * b; *b = 5; return *b;}");
  REQUIRE(completed(c));
  CHECK(c.prelude == "typedef int a;\n");
  CHECK_NOTHROW(minic::parse_function(c.source));
}

TEST_CASE("completion is idempotent and its output always type-checks") {
  const char* sources[] = {
      "mytype f(mytype x){return x + 1;}",
      "int f(int a){int y = g(1.5); return y + a;}",
      "mytype f(mytype x){double d = g(1.5); return x + (int)d;}",
      "int f(int *u){(a)*u; return 0;}",
      "int f(){a * b; *b = 5; return *b;}",
      "double f(double x){return h(x) + 0.5;}",
      "int f(int n){int s = 0; for(int i = 0; i < n; i = i + 1)"
      "{s = s + q(i);} return s;}",
      "typedef double real;\nreal f(real x){return x * 2.0;}",
  };
  for (const char* src : sources) {
    CAPTURE(src);
    Completion c = complete(src);
    REQUIRE(completed(c));
    CHECK_NOTHROW(minic::parse_function(c.source));
    Completion again = complete(c.source);
    REQUIRE(completed(again));
    CHECK(again.source == c.source);
    CHECK(again.prelude.empty());
  }
}
