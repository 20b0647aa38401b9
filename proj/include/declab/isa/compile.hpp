#pragma once

#include "declab/isa/isa.hpp"
#include "declab/minic/ast.hpp"

namespace declab::isa {

// Lowers a valid function to assembler. Deterministic: the same
// (ast, isa, opt) always produces the same program.
//
// O0 is deliberately naive — every sub-expression result is materialized
// through the frame. O2 first rewrites the AST (constant folding,
// literal-condition branch removal, full unrolling of counted loops with
// trip count <= 4, straight-line copy propagation, dead-store
// elimination) and then, on REG, keeps unaddressed variables in
// registers: parameters stay in r0-r5, locals take r6-r11, r12-r14 are
// expression scratch, r15 is the frame pointer.
//
// Invalid input (ill-typed, ambiguous nodes) raises minic::Diag.
AsmProgram compile(const minic::Ast& ast, IsaId isa, OptLevel opt);

// The AST-level O2 pipeline on its own, for inspection and tests.
minic::Ast optimize_ast(const minic::Ast& ast);

}  // namespace declab::isa
