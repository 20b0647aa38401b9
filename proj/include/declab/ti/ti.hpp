#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "declab/minic/parse.hpp"

namespace declab::ti {

// Types that may contain inference variables.
struct Term;
using TermRef = std::shared_ptr<const Term>;

struct Term {
  enum class Kind { Int, Float, Void, Ptr, Func, Var };
  Kind kind = Kind::Int;
  TermRef elem;                 // Ptr element
  std::vector<TermRef> params;  // Func parameters
  TermRef ret;                  // Func return
  int var = -1;                 // Var id

  static TermRef t_int();
  static TermRef t_float();
  static TermRef t_void();
  static TermRef ptr(TermRef elem);
  static TermRef func(std::vector<TermRef> params, TermRef ret);
  static TermRef var_term(int id);
};

std::string term_to_string(const Term& t);

// Equality constraint `a = b`, tagged with the source position it came from.
struct Constraint {
  TermRef a, b;
  int line = 0, col = 0;
};

enum class Failure {
  None,
  Syntax,        // hypothesis does not parse at all
  TypeConflict,  // constraints are unsatisfiable
  OccursCheck,   // a type would have to contain itself
  Conflict,      // a synthesized name collides with an existing declaration
  Unsupported,   // inferred type has no spelling in the language subset
};

// Constraints for one fully disambiguated reading of a hypothesis.
struct Analysis {
  std::vector<Constraint> constraints;
  int n_vars = 0;                           // fresh-variable count
  std::map<std::string, TermRef> unknowns;  // unknown name -> its variable
  std::vector<std::string> unknown_order;   // first-use order
  std::set<std::string> used_as_type;       // appears in type position
  std::set<std::string> used_as_func;       // appears as a callee
  std::set<std::string> used_as_value;      // read or addressed as a variable
};

// Generates constraints for an ast without Ambig/AmbigDecl nodes. Unknown
// names found in any position get inference variables; whether a prelude
// can actually declare them is synthesize_prelude's decision. Returns false
// only for malformed input (leftover ambiguity nodes).
bool generate_constraints(const minic::Ast& ast, Analysis& out,
                          std::string& err);

// An idempotent substitution: the most general unifier of a constraint set.
struct Substitution {
  std::map<int, TermRef> bind;
  TermRef walk(TermRef t) const;    // follow the head variable chain
  TermRef ground(TermRef t) const;  // deep resolve; free variables become int
};

struct SolveResult {
  bool ok = false;
  Substitution sub;
  Failure failure = Failure::None;
  std::string message;
};

// Unification with an occurs check. Order-independent: permuting the
// constraints changes variable bookkeeping but not any ground type.
SolveResult solve(const std::vector<Constraint>& constraints);

// Renders typedef/extern lines for the unknowns, in first-use order. `ast`
// is the disambiguated function the analysis was generated from; it supplies
// the declared names that synthesized ones must not collide with.
struct Prelude {
  bool ok = false;
  std::vector<std::string> lines;
  Failure failure = Failure::None;
  std::string message;
};
Prelude synthesize_prelude(const Analysis& an, const Substitution& sub,
                           const minic::Ast& ast);

// Ambiguity sites (Ambig expressions, AmbigDecl statements) in pre-order.
// Both sides of an Ambig node hold the same operand subtree, so the count
// matches the sites encountered when walking any resolution of the tree.
int count_ambiguities(const minic::Ast& ast);

// Rewrites every ambiguity to one reading, in place. Bit k of `mask` picks
// the cast / declaration reading for site k; a clear bit picks the value /
// expression reading.
void resolve_ambiguities(minic::Ast& ast, uint32_t mask);

struct Completion {
  enum class Status { Completed, Unfixable };
  Status status = Status::Unfixable;
  std::string source;   // Completed: prelude + original text
  std::string prelude;  // the synthesized lines alone ("" when none needed)
  Failure failure = Failure::None;
  std::string message;  // Unfixable: what went wrong
};

// The whole repair pipeline: lenient parse, ambiguity resolution (value
// readings preferred over casts), constraint solving with int defaulting,
// prelude synthesis, and a final strict re-parse + type check of the result.
// A hypothesis with no unknowns passes through with its text unchanged.
// Never throws.
Completion complete_program(const std::string& hypothesis);

}  // namespace declab::ti
