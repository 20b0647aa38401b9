#pragma once

#include <string>

#include "declab/minic/ast.hpp"

namespace declab::minic {

// Canonical text: 2-space indents, one statement per line, K&R braces,
// single spaces around binary operators, minimal parentheses. Details in
// docs/canonical-form.md. parse(pretty_print(a)) is structurally equal to a.
std::string pretty_print(const Ast& ast);           // prelude + function
std::string pretty_print_function(const Ast& ast);  // function text only

std::string print_expr(const Expr& e);

std::string typedef_line(const TypedefDecl& td);
std::string extern_line(const ExternDecl& ex);

// Shortest decimal form that parses back to the same bits; always carries
// a '.' or an exponent so it lexes as a float.
std::string format_float(double v);

}  // namespace declab::minic
