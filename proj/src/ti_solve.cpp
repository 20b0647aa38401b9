#include <sstream>

#include "declab/ti/ti.hpp"

namespace declab::ti {

TermRef Substitution::walk(TermRef t) const {
  while (t->kind == Term::Kind::Var) {
    auto it = bind.find(t->var);
    if (it == bind.end()) break;
    t = it->second;
  }
  return t;
}

TermRef Substitution::ground(TermRef t) const {
  t = walk(std::move(t));
  switch (t->kind) {
    case Term::Kind::Var: return Term::t_int();  // defaulting, applied last
    case Term::Kind::Ptr: return Term::ptr(ground(t->elem));
    case Term::Kind::Func: {
      std::vector<TermRef> ps;
      for (const auto& p : t->params) ps.push_back(ground(p));
      return Term::func(std::move(ps), ground(t->ret));
    }
    default: return t;
  }
}

namespace {

struct UnifyFail {
  Failure failure;
  std::string msg;
};

class Unifier {
 public:
  explicit Unifier(Substitution& sub) : sub_(sub) {}

  void unify(TermRef a, TermRef b) {
    a = sub_.walk(std::move(a));
    b = sub_.walk(std::move(b));
    if (a->kind == Term::Kind::Var && b->kind == Term::Kind::Var &&
        a->var == b->var)
      return;
    if (a->kind == Term::Kind::Var) return bind_var(a, b);
    if (b->kind == Term::Kind::Var) return bind_var(b, a);
    if (a->kind != b->kind)
      throw UnifyFail{Failure::TypeConflict,
                      "cannot unify " + term_to_string(*a) + " with " +
                          term_to_string(*b)};
    switch (a->kind) {
      case Term::Kind::Ptr:
        unify(a->elem, b->elem);
        return;
      case Term::Kind::Func:
        if (a->params.size() != b->params.size())
          throw UnifyFail{Failure::TypeConflict,
                          "call arity mismatch: " +
                              std::to_string(a->params.size()) + " vs " +
                              std::to_string(b->params.size())};
        for (size_t i = 0; i < a->params.size(); ++i)
          unify(a->params[i], b->params[i]);
        unify(a->ret, b->ret);
        return;
      default:
        return;  // identical ground scalars
    }
  }

 private:
  Substitution& sub_;

  bool occurs(int var, TermRef t) const {
    t = sub_.walk(std::move(t));
    switch (t->kind) {
      case Term::Kind::Var: return t->var == var;
      case Term::Kind::Ptr: return occurs(var, t->elem);
      case Term::Kind::Func: {
        for (const auto& p : t->params)
          if (occurs(var, p)) return true;
        return occurs(var, t->ret);
      }
      default: return false;
    }
  }

  void bind_var(const TermRef& v, const TermRef& t) {
    if (t->kind != Term::Kind::Var && occurs(v->var, t))
      throw UnifyFail{Failure::OccursCheck,
                      "type of 't" + std::to_string(v->var) +
                          " would contain itself: " + term_to_string(*t)};
    sub_.bind[v->var] = t;
  }
};

}  // namespace

SolveResult solve(const std::vector<Constraint>& constraints) {
  SolveResult out;
  Unifier u(out.sub);
  for (const auto& c : constraints) {
    try {
      u.unify(c.a, c.b);
    } catch (const UnifyFail& f) {
      out.ok = false;
      out.failure = f.failure;
      std::ostringstream os;
      if (c.line > 0) os << "line " << c.line << ": ";
      os << f.msg;
      out.message = os.str();
      return out;
    }
  }
  out.ok = true;
  return out;
}

}  // namespace declab::ti
