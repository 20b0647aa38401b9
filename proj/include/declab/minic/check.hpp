#pragma once

#include "declab/minic/ast.hpp"

namespace declab::minic {

// Type-checks `ast` in place, filling Expr::ty on every expression.
// Strict typing: no implicit conversions anywhere; conditions and logical
// operands must be int; comparisons yield int. Throws Diag on violations.
void check(Ast& ast);

}  // namespace declab::minic
