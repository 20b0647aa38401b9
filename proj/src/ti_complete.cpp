#include <sstream>

#include "declab/minic/lexer.hpp"
#include "declab/minic/print.hpp"
#include "declab/ti/ti.hpp"

namespace declab::ti {

namespace {

using minic::Ast;
using minic::Stmt;
using minic::Ty;
using minic::TyRef;

// Ground term -> surface type, or null when the subset cannot spell it.
TyRef ty_from_term(const TermRef& t) {
  switch (t->kind) {
    case Term::Kind::Int: return Ty::make_int();
    case Term::Kind::Float: return Ty::make_float();
    case Term::Kind::Void: return Ty::make_void();
    case Term::Kind::Ptr:
      if (t->elem->kind == Term::Kind::Int) return Ty::make_ptr(Ty::make_int());
      if (t->elem->kind == Term::Kind::Float)
        return Ty::make_ptr(Ty::make_float());
      return nullptr;
    default: return nullptr;
  }
}

void declared_names_stmt(const Stmt& s, std::set<std::string>& out) {
  switch (s.kind) {
    case Stmt::Kind::Decl:
      out.insert(s.decl_name);
      return;
    case Stmt::Kind::If:
      for (const auto& c : s.body) declared_names_stmt(*c, out);
      for (const auto& c : s.else_body) declared_names_stmt(*c, out);
      return;
    case Stmt::Kind::While:
      for (const auto& c : s.body) declared_names_stmt(*c, out);
      return;
    case Stmt::Kind::For:
      declared_names_stmt(*s.for_init, out);
      for (const auto& c : s.body) declared_names_stmt(*c, out);
      return;
    case Stmt::Kind::AmbigDecl:
      out.insert(s.decl_name);
      return;
    default:
      return;
  }
}

std::set<std::string> declared_names(const Ast& ast) {
  std::set<std::string> out;
  out.insert(ast.name);
  for (const auto& p : ast.params) out.insert(p.first);
  for (const auto& td : ast.typedefs) out.insert(td.name);
  for (const auto& ex : ast.externs) out.insert(ex.name);
  for (const auto& s : ast.body) declared_names_stmt(*s, out);
  return out;
}

Completion unfixable(Failure f, std::string msg) {
  Completion out;
  out.status = Completion::Status::Unfixable;
  out.failure = f;
  out.message = std::move(msg);
  return out;
}

}  // namespace

Prelude synthesize_prelude(const Analysis& an, const Substitution& sub,
                           const Ast& ast) {
  Prelude out;
  std::set<std::string> taken = declared_names(ast);
  for (const std::string& name : an.unknown_order) {
    bool as_type = an.used_as_type.count(name) > 0;
    bool as_func = an.used_as_func.count(name) > 0;
    if (an.used_as_value.count(name) || (!as_type && !as_func)) {
      // Local variables cannot be conjured by a prelude; neither can a name
      // that doubles as a variable elsewhere.
      out.failure = Failure::Unsupported;
      out.message =
          "cannot synthesize a declaration for variable '" + name + "'";
      return out;
    }
    if (as_type && as_func) {
      out.failure = Failure::Conflict;
      out.message = "'" + name + "' is used both as a type and as a function";
      return out;
    }
    if (taken.count(name)) {
      out.failure = Failure::Conflict;
      out.message = "'" + name + "' is already declared in the hypothesis";
      return out;
    }
    taken.insert(name);
    TermRef g = sub.ground(an.unknowns.at(name));
    if (as_type) {
      if (g->kind != Term::Kind::Int && g->kind != Term::Kind::Float) {
        out.failure = Failure::Unsupported;
        out.message = "'" + name + "' would need to alias " +
                      term_to_string(*g) + ", but typedefs name scalars only";
        return out;
      }
      minic::TypedefDecl td;
      td.name = name;
      td.ty = g->kind == Term::Kind::Int ? Ty::make_int() : Ty::make_float();
      out.lines.push_back(minic::typedef_line(td));
    } else {
      if (g->kind != Term::Kind::Func) {
        out.failure = Failure::Unsupported;
        out.message = "'" + name + "' is called but was inferred as " +
                      term_to_string(*g);
        return out;
      }
      minic::ExternDecl ex;
      ex.name = name;
      ex.ret = ty_from_term(g->ret);
      if (!ex.ret || ex.ret->kind == Ty::Kind::Ptr) {
        out.failure = Failure::Unsupported;
        out.message =
            "'" + name + "' would need return type " + term_to_string(*g->ret);
        return out;
      }
      for (const auto& p : g->params) {
        TyRef pt = ty_from_term(p);
        if (!pt || pt->kind == Ty::Kind::Void) {
          out.failure = Failure::Unsupported;
          out.message = "'" + name + "' would need a parameter of type " +
                        term_to_string(*p);
          return out;
        }
        ex.params.push_back(std::move(pt));
      }
      out.lines.push_back(minic::extern_line(ex));
    }
  }
  out.ok = true;
  return out;
}

Completion complete_program(const std::string& hypothesis) {
  minic::ParsedPartial pp;
  try {
    pp = minic::parse_partial_program(hypothesis);
  } catch (const minic::Diag& d) {
    Failure f = d.kind == minic::Diag::Kind::Unsupported ? Failure::Unsupported
                                                         : Failure::Syntax;
    std::ostringstream os;
    os << "line " << d.line << ": " << d.what();
    return unfixable(f, os.str());
  }

  int n_sites = count_ambiguities(pp.ast);
  if (n_sites > 8)
    return unfixable(Failure::Unsupported, "too many ambiguous constructs");

  // Masks count up, so the all-value reading is tried first and value
  // readings are preferred site by site when several resolutions solve.
  Completion result;
  bool have_failure = false;
  auto keep_first = [&](Completion c) {
    if (!have_failure) {
      result = std::move(c);
      have_failure = true;
    }
  };
  for (uint32_t mask = 0; mask < (1u << n_sites); ++mask) {
    Ast work = minic::clone(pp.ast);
    if (n_sites > 0) resolve_ambiguities(work, mask);
    Analysis an;
    std::string err;
    if (!generate_constraints(work, an, err)) {
      keep_first(unfixable(Failure::TypeConflict, err));
      continue;
    }
    SolveResult sr = solve(an.constraints);
    if (!sr.ok) {
      keep_first(unfixable(sr.failure, sr.message));
      continue;
    }
    Prelude pl = synthesize_prelude(an, sr.sub, work);
    if (!pl.ok) {
      keep_first(unfixable(pl.failure, pl.message));
      continue;
    }
    std::string pre;
    for (const std::string& line : pl.lines) pre += line + "\n";
    std::string source = pre.empty() ? hypothesis : pre + hypothesis;
    // Soundness gate: a Completed result must survive the strict front door.
    try {
      minic::parse_function(source);
    } catch (const minic::Diag& d) {
      std::ostringstream os;
      os << "completed program does not type-check (line " << d.line << ": "
         << d.what() << ")";
      keep_first(unfixable(Failure::TypeConflict, os.str()));
      continue;
    }
    Completion out;
    out.status = Completion::Status::Completed;
    out.prelude = pre;
    out.source = std::move(source);
    return out;
  }
  if (!have_failure)
    result = unfixable(Failure::TypeConflict, "no consistent reading");
  return result;
}

}  // namespace declab::ti
