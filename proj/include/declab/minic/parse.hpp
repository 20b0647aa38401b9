#pragma once

#include <string_view>
#include <vector>

#include "declab/minic/ast.hpp"

namespace declab::minic {

// Strict parse of an optional typedef/extern prelude followed by exactly one
// function definition. Unknown identifiers are errors. Throws Diag; does not
// type-check.
Ast parse_program(std::string_view text);

// parse_program followed by type checking; the normal front door.
Ast parse_function(std::string_view text);

// Lenient parse for decompiler hypotheses. Unknown identifiers are allowed:
// uses in declarator position become unresolved Alias types, undeclared
// callees stay as calls, and genuinely ambiguous constructs — `(a)*b` in
// expressions, `a * b;` at statement level — are kept as Ambig / AmbigDecl
// nodes holding both readings.
struct ParsedPartial {
  Ast ast;
  // Used-but-undeclared identifiers in first-use order (type names,
  // function names, ambiguous names, and stray variables alike).
  std::vector<std::string> unknowns;
};
ParsedPartial parse_partial_program(std::string_view text);

}  // namespace declab::minic
