#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "declab/common.hpp"
#include "declab/equiv/equiv.hpp"
#include "declab/isa/compile.hpp"
#include "declab/isa/text.hpp"
#include "declab/isa/vm.hpp"
#include "declab/minic/interp.hpp"
#include "declab/minic/parse.hpp"

using namespace declab;
using namespace declab::isa;
using minic::Inputs;
using minic::Outcome;
using minic::Value;

namespace {

const IsaId kIsas[] = {IsaId::REG, IsaId::STK};
const OptLevel kOpts[] = {OptLevel::O0, OptLevel::O2};

AsmProgram compile_src(const std::string& src, IsaId isa, OptLevel opt) {
  return compile(minic::parse_function(src), isa, opt);
}

int count_op(const std::string& asm_text, const std::string& mnemonic) {
  // Instructions are "  op ..." or "label: op ...": match on the mnemonic
  // token to avoid counting substrings of other mnemonics (add vs fadd).
  int n = 0;
  size_t pos = 0;
  while ((pos = asm_text.find(mnemonic, pos)) != std::string::npos) {
    bool head = pos > 0 && (asm_text[pos - 1] == ' ');
    size_t end = pos + mnemonic.size();
    bool tail = end >= asm_text.size() || asm_text[end] == ' ' ||
                asm_text[end] == '\n';
    if (head && tail) ++n;
    pos = end;
  }
  return n;
}

// Sources covering every expression and statement form, several trap paths,
// and both scalar kinds. Indices into buffers stay provably in range or
// provably trapping on both execution paths.
const char* kCorpus[] = {
    "int f(int a){return a + 1;}",
    "int f(int a, int b){return a * b - a / (b * b + 1) + a % 3;}",
    "double f(double x, double y){return x * y + x / 2.5 - 1.25;}",
    "double f(int a){return (double)a * 1.5;}",
    "int f(double x){return (int)x + (int)1.9;}",
    "int f(double x){return (int)(x * 100000000.0);}",
    "double f(double x){return -x + -0.5;}",
    "int f(int a, int b){return !a && b || a > b;}",
    "int f(double x, double y){return x < y && x <= y || x == y;}",
    "int f(int a){int *q = &a; *q = *q + 5; return a;}",
    "int f(int *p){int t = 0; for(int i = 0; i < 8; i = i + 1){t = t + p[i];}"
    " p[0] = t; return t;}",
    "double f(double *p){p[1] = p[0] * 2.0; return p[1];}",
    "int f(){return \"AB\"[0] + \"AB\"[1];}",
    "int f(int i){return \"hello\"[i % 5];}",
    "int f(int n){int i = 0; int s = 0; while(i < n % 16){s = s + i;"
    " i = i + 1;} return s;}",
    "int f(int a, int b){if(a < b){return a;}else{return b;}}",
    "extern int g(int);\nint f(int a){return g(a) + 1;}",
    "int f(int *p, int i){return p[i * 1000];}",
    "int f(){int *p; return *p;}",
    "int f(int a){return 7 / (a - a);}",
    "int f(int a){return (a + 2000000000) + 2000000000;}",
    "double f(double x){return x / 0.0;}",
    "double f(double x){return (x - x) / (x - x);}",
    "void f(int *p, int x){p[2] = x * x;}",
};

bool straight_line(const std::string& src) {
  return src.find("while") == std::string::npos &&
         src.find("for") == std::string::npos &&
         src.find("if") == std::string::npos;
}

}  // namespace

TEST_CASE("constant folding collapses 2+3 at O2") {
  std::string o2 = emit_asm(compile_src("int f(){return 2 + 3;}",
                                        IsaId::REG, OptLevel::O2));
  CHECK(o2.find("#5") != std::string::npos);
  CHECK(count_op(o2, "add") == 0);

  std::string o0 = emit_asm(compile_src("int f(){return 2 + 3;}",
                                        IsaId::REG, OptLevel::O0));
  CHECK(count_op(o0, "ldi") >= 2);
  CHECK(count_op(o0, "add") == 1);

  std::string s2 = emit_asm(compile_src("int f(){return 2 + 3;}",
                                        IsaId::STK, OptLevel::O2));
  CHECK(s2.find("push #5") != std::string::npos);
  CHECK(count_op(s2, "add") == 0);
}

TEST_CASE("return 7 runs on every configuration") {
  for (IsaId isa : kIsas)
    for (OptLevel opt : kOpts) {
      AsmProgram p = compile_src("int f(){return 7;}", isa, opt);
      Outcome o = run_vm(p, Inputs{}, 1000);
      REQUIRE(o.kind == Outcome::Kind::Returned);
      CHECK(o.ret.i == 7);
      CHECK(o.final_buffers.empty());
    }
}

TEST_CASE("emit/parse/emit is byte-identical across the corpus") {
  for (const char* src : kCorpus)
    for (IsaId isa : kIsas)
      for (OptLevel opt : kOpts) {
        CAPTURE(src);
        std::string once = emit_asm(compile_src(src, isa, opt));
        AsmProgram back = parse_asm(once);
        CHECK(emit_asm(back) == once);
      }
}

TEST_CASE("label-carrying branches round-trip through the text form") {
  std::string text =
      ".isa REG\n.entry f\n.args i\n.ret i\n.frame 0\n"
      "f: brz r0, L2\n  ldi r0, #1\nL2: ret\n";
  AsmProgram p = parse_asm(text);
  CHECK(emit_asm(p) == text);

  Inputs zero;
  zero.scalars.push_back(Value::of_int(0));
  Outcome o = run_vm(p, zero, 100);
  REQUIRE(o.kind == Outcome::Kind::Returned);
  CHECK(o.ret.i == 0);

  Inputs five;
  five.scalars.push_back(Value::of_int(5));
  o = run_vm(p, five, 100);
  REQUIRE(o.kind == Outcome::Kind::Returned);
  CHECK(o.ret.i == 1);
}

TEST_CASE("malformed assembler is rejected with a reason") {
  CHECK_THROWS_WITH_AS(
      parse_asm(".isa REG\n.entry f\n.args\n.ret i\n.frame 0\n"
                "f: bogus r0, r1\n"),
      doctest::Contains("unknown opcode"), AsmError);
  CHECK_THROWS_WITH_AS(
      parse_asm(".isa REG\n.entry f\n.args\n.ret i\n.frame 0\n"
                "f: brz r0, L9\n  ret\n"),
      doctest::Contains("missing label"), AsmError);
  CHECK_THROWS_WITH_AS(
      parse_asm(".isa REG\n.entry f\n.args\n.ret i\n.frame 0\n"
                "f: ldi r0, #1\nf: ret\n"),
      doctest::Contains("duplicate label"), AsmError);
  CHECK_THROWS_WITH_AS(
      parse_asm(".isa REG\n.entry f\n.args\n.ret i\n.frame 0\nf:\n  ret\n"),
      doctest::Contains("label without an instruction"), AsmError);
}

TEST_CASE("hand-assembled buffer store/load round-trips a value") {
  AsmProgram p = parse_asm(
      ".isa REG\n.entry f\n.args pi\n.ret i\n.frame 0\n"
      "f: ldi r1, #7\n"
      "  st [r0 + #0], r1\n"
      "  ld r0, [r0 + #0]\n"
      "  ret\n");
  Inputs in;
  in.buffers.push_back({Value::of_int(0)});
  Outcome o = run_vm(p, in, 100);
  REQUIRE(o.kind == Outcome::Kind::Returned);
  CHECK(o.ret.i == 7);
  REQUIRE(o.final_buffers.size() == 1);
  REQUIRE(o.final_buffers[0].size() == 1);
  CHECK(o.final_buffers[0][0].i == 7);
}

TEST_CASE("infinite loops stop at the step limit") {
  AsmProgram p =
      parse_asm(".isa REG\n.entry f\n.args\n.ret i\n.frame 0\nf: br f\n");
  Outcome o = run_vm(p, Inputs{}, 100);
  CHECK(o.kind == Outcome::Kind::StepLimit);

  AsmProgram c = compile_src("int f(){while(1 < 2){} return 0;}", IsaId::STK,
                             OptLevel::O0);
  o = run_vm(c, Inputs{}, 500);
  CHECK(o.kind == Outcome::Kind::StepLimit);
}

TEST_CASE("differential: the VM agrees with the interpreter on the corpus") {
  for (const char* src : kCorpus) {
    minic::Ast ast = minic::parse_function(src);
    equiv::EquivConfig cfg;
    cfg.n_tests = 6;
    cfg.input_seed = fnv1a64(src);
    // Derive the input shapes once from any compilation's signature.
    AsmProgram first = compile(ast, IsaId::REG, OptLevel::O0);
    std::vector<Inputs> inputs = equiv::gen_inputs(first.args, cfg);
    for (const Inputs& in : inputs) {
      Outcome want = minic::interpret(ast, in, 1000000);
      for (IsaId isa : kIsas)
        for (OptLevel opt : kOpts) {
          CAPTURE(src);
          CAPTURE(isa == IsaId::REG ? "REG" : "STK");
          CAPTURE(opt == OptLevel::O0 ? "O0" : "O2");
          AsmProgram prog = compile(ast, isa, opt);
          Outcome got = run_vm(prog, in, 1000000);
          CAPTURE(equiv::outcome_to_string(want));
          CAPTURE(equiv::outcome_to_string(got));
          CHECK(equiv::outcome_equal(want, got));
        }
    }
  }
}

TEST_CASE("O2 emits no more instructions than O0 for straight-line code") {
  for (const char* src : kCorpus) {
    if (!straight_line(src)) continue;
    for (IsaId isa : kIsas) {
      CAPTURE(src);
      AsmProgram o0 = compile_src(src, isa, OptLevel::O0);
      AsmProgram o2 = compile_src(src, isa, OptLevel::O2);
      CHECK(o2.instrs.size() <= o0.instrs.size());
    }
  }
}

TEST_CASE("compilation is deterministic") {
  for (const char* src : kCorpus)
    for (IsaId isa : kIsas)
      for (OptLevel opt : kOpts) {
        std::string a = emit_asm(compile_src(src, isa, opt));
        std::string b = emit_asm(compile_src(src, isa, opt));
        CHECK(a == b);
      }
}

TEST_CASE("O0 and O2 have identical IO behavior") {
  for (const char* src : kCorpus) {
    minic::Ast ast = minic::parse_function(src);
    equiv::EquivConfig cfg;
    cfg.n_tests = 5;
    cfg.input_seed = fnv1a64(src) ^ 0x9e3779b97f4a7c15ull;
    for (IsaId isa : kIsas) {
      AsmProgram o0 = compile(ast, isa, OptLevel::O0);
      AsmProgram o2 = compile(ast, isa, OptLevel::O2);
      for (const Inputs& in : equiv::gen_inputs(o0.args, cfg)) {
        CAPTURE(src);
        Outcome a = run_vm(o0, in, 1000000);
        Outcome b = run_vm(o2, in, 1000000);
        CHECK(equiv::outcome_equal(a, b));
      }
    }
  }
}
