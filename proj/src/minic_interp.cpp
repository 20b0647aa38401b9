#include "declab/minic/interp.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "declab/common.hpp"

namespace declab::minic {

int32_t float_to_int(double f) {
  if (std::isnan(f)) return 0;
  double t = std::trunc(f);
  if (t <= -2147483648.0) return INT32_MIN;
  if (t >= 2147483647.0) return INT32_MAX;
  return static_cast<int32_t>(t);
}

namespace {

struct TrapEx { TrapReason reason; };
struct StepEx {};

// Every variable lives in its own one-cell segment, so `&x` is an ordinary
// pointer and variable access is a load/store of that cell. Input buffers
// occupy the first segments; string literals get one segment per site.
class Interp {
 public:
  Interp(const Ast& ast, const Inputs& inputs, uint64_t limit)
      : ast_(ast), limit_(limit) {
    size_t si = 0, bi = 0;
    for (const auto& p : ast_.params) {
      TyRef t = resolve(p.second);
      if (t->kind == Ty::Kind::Ptr) {
        if (bi >= inputs.buffers.size())
          throw std::invalid_argument("missing buffer input");
        segments_.push_back(inputs.buffers[bi++]);
      }
    }
    num_input_buffers_ = static_cast<int32_t>(segments_.size());
    for (const auto& s : ast_.body) alloc_strings(*s);
    // Parameter cells, after buffers and strings.
    si = 0;
    bi = 0;
    for (const auto& p : ast_.params) {
      TyRef t = resolve(p.second);
      Value v;
      if (t->kind == Ty::Kind::Ptr) {
        v = Value::ptr(static_cast<int32_t>(bi++), 0);
      } else {
        if (si >= inputs.scalars.size())
          throw std::invalid_argument("missing scalar input");
        v = inputs.scalars[si++];
        bool want_float = t->kind == Ty::Kind::Float;
        if (want_float != (v.kind == Value::Kind::Float))
          throw std::invalid_argument("scalar input kind mismatch");
      }
      vars_[p.first] = new_cell(v);
    }
  }

  Outcome run() {
    Outcome out;
    try {
      for (const auto& s : ast_.body)
        if (exec_stmt(*s, out.ret)) {
          finish(out, Outcome::Kind::Returned);
          return out;
        }
      // Fell off the end: only reachable for void functions (the checker
      // guarantees non-void bodies return on every path).
      out.ret = Value::void_v();
      finish(out, Outcome::Kind::Returned);
      return out;
    } catch (const TrapEx& t) {
      out.trap = t.reason;
      finish(out, Outcome::Kind::Trap);
      return out;
    } catch (const StepEx&) {
      out.kind = Outcome::Kind::StepLimit;
      out.steps_used = steps_;
      return out;
    }
  }

 private:
  const Ast& ast_;
  uint64_t limit_;
  uint64_t steps_ = 0;
  std::vector<std::vector<Value>> segments_;
  int32_t num_input_buffers_ = 0;
  std::map<std::string, int32_t> vars_;  // name -> one-cell segment id
  std::map<const Expr*, int32_t> string_seg_;

  int32_t new_cell(const Value& v) {
    segments_.push_back({v});
    return static_cast<int32_t>(segments_.size() - 1);
  }

  void finish(Outcome& out, Outcome::Kind k) {
    out.kind = k;
    out.steps_used = steps_;
    out.final_buffers.assign(segments_.begin(),
                             segments_.begin() + num_input_buffers_);
  }

  void step() {
    if (++steps_ > limit_) throw StepEx{};
  }

  [[noreturn]] void trap(TrapReason r) const { throw TrapEx{r}; }

  void alloc_strings(const Expr& e) {
    if (e.kind == Expr::Kind::StringLit) {
      std::vector<Value> cells;
      cells.reserve(e.str_val.size() + 1);
      for (unsigned char c : e.str_val)
        cells.push_back(Value::of_int(static_cast<int32_t>(c)));
      cells.push_back(Value::of_int(0));
      segments_.push_back(std::move(cells));
      string_seg_[&e] = static_cast<int32_t>(segments_.size() - 1);
    }
    if (e.lhs) alloc_strings(*e.lhs);
    if (e.rhs) alloc_strings(*e.rhs);
    for (const auto& a : e.args) alloc_strings(*a);
  }
  void alloc_strings(const Stmt& s) {
    if (s.init) alloc_strings(*s.init);
    if (s.target) alloc_strings(*s.target);
    if (s.value) alloc_strings(*s.value);
    if (s.cond) alloc_strings(*s.cond);
    if (s.for_init) alloc_strings(*s.for_init);
    if (s.for_step) alloc_strings(*s.for_step);
    if (s.expr) alloc_strings(*s.expr);
    for (const auto& st : s.body) alloc_strings(*st);
    for (const auto& st : s.else_body) alloc_strings(*st);
  }

  Value load(const Value& ptr, int32_t idx) {
    if (ptr.kind != Value::Kind::Ptr) trap(TrapReason::InvalidOp);
    int64_t off = static_cast<int64_t>(ptr.off) + idx;
    if (ptr.seg < 0 || ptr.seg >= static_cast<int32_t>(segments_.size()) ||
        off < 0 || off >= static_cast<int64_t>(segments_[ptr.seg].size()))
      trap(TrapReason::OutOfBounds);
    return segments_[ptr.seg][static_cast<size_t>(off)];
  }

  void store(const Value& ptr, int32_t idx, const Value& v) {
    if (ptr.kind != Value::Kind::Ptr) trap(TrapReason::InvalidOp);
    int64_t off = static_cast<int64_t>(ptr.off) + idx;
    if (ptr.seg < 0 || ptr.seg >= static_cast<int32_t>(segments_.size()) ||
        off < 0 || off >= static_cast<int64_t>(segments_[ptr.seg].size()))
      trap(TrapReason::OutOfBounds);
    segments_[ptr.seg][static_cast<size_t>(off)] = v;
  }

  Value& var_cell(const std::string& name) {
    auto it = vars_.find(name);
    if (it == vars_.end()) trap(TrapReason::InvalidOp);
    return segments_[it->second][0];
  }

  // Returns true when a return statement fired; `ret` then holds the value.
  bool exec_stmt(const Stmt& s, Value& ret) {
    step();
    switch (s.kind) {
      case Stmt::Kind::Decl: {
        Value v;
        if (s.init) {
          v = eval(*s.init);
        } else {
          TyRef t = resolve(s.decl_ty);
          if (t->kind == Ty::Kind::Int) v = Value::of_int(0);
          else if (t->kind == Ty::Kind::Float) v = Value::of_float(0.0);
          else v = Value::ptr(-1, 0);
        }
        auto it = vars_.find(s.decl_name);
        if (it == vars_.end()) vars_[s.decl_name] = new_cell(v);
        else segments_[it->second][0] = v;  // loop bodies re-declare
        return false;
      }
      case Stmt::Kind::Assign:
        assign(*s.target, *s.value);
        return false;
      case Stmt::Kind::If: {
        Value c = eval(*s.cond);
        const auto& body = (c.i != 0) ? s.body : s.else_body;
        for (const auto& st : body)
          if (exec_stmt(*st, ret)) return true;
        return false;
      }
      case Stmt::Kind::While:
        for (;;) {
          Value c = eval(*s.cond);
          if (c.i == 0) return false;
          for (const auto& st : s.body)
            if (exec_stmt(*st, ret)) return true;
        }
      case Stmt::Kind::For: {
        if (exec_stmt(*s.for_init, ret)) return true;
        for (;;) {
          Value c = eval(*s.cond);
          if (c.i == 0) return false;
          for (const auto& st : s.body)
            if (exec_stmt(*st, ret)) return true;
          if (exec_stmt(*s.for_step, ret)) return true;
        }
      }
      case Stmt::Kind::Return:
        ret = s.expr ? eval(*s.expr) : Value::void_v();
        return true;
      case Stmt::Kind::ExprStmt:
        eval(*s.expr);
        return false;
      case Stmt::Kind::AmbigDecl:
        trap(TrapReason::InvalidOp);
    }
    return false;
  }

  // Stores evaluate address parts first, then the right-hand side, then
  // bounds-check at the store; the compilers emit the same order so traps
  // agree between interpreter and VM.
  void assign(const Expr& target, const Expr& value) {
    switch (target.kind) {
      case Expr::Kind::Var: {
        Value v = eval(value);
        var_cell(target.name) = v;
        return;
      }
      case Expr::Kind::Index: {
        Value base = eval(*target.lhs);
        Value idx = eval(*target.rhs);
        Value v = eval(value);
        store(base, idx.i, v);
        return;
      }
      case Expr::Kind::Deref: {
        Value base = eval(*target.lhs);
        Value v = eval(value);
        store(base, 0, v);
        return;
      }
      default:
        trap(TrapReason::InvalidOp);
    }
  }

  Value eval(const Expr& e) {
    step();
    switch (e.kind) {
      case Expr::Kind::IntLit: return Value::of_int(e.int_val);
      case Expr::Kind::FloatLit: return Value::of_float(e.float_val);
      case Expr::Kind::StringLit:
        return Value::ptr(string_seg_.at(&e), 0);
      case Expr::Kind::Var:
        return var_cell(e.name);
      case Expr::Kind::Unary: {
        Value v = eval(*e.lhs);
        if (e.un_op == UnOp::Neg) {
          if (v.kind == Value::Kind::Int)
            return Value::of_int(wrap32(-static_cast<int64_t>(v.i)));
          return Value::of_float(-v.f);
        }
        return Value::of_int(v.i == 0 ? 1 : 0);
      }
      case Expr::Kind::Binary: return eval_binary(e);
      case Expr::Kind::Index: {
        Value base = eval(*e.lhs);
        Value idx = eval(*e.rhs);
        return load(base, idx.i);
      }
      case Expr::Kind::Deref: {
        Value base = eval(*e.lhs);
        return load(base, 0);
      }
      case Expr::Kind::AddrOf: {
        auto it = vars_.find(e.name);
        if (it == vars_.end()) trap(TrapReason::InvalidOp);
        return Value::ptr(it->second, 0);
      }
      case Expr::Kind::Cast: {
        Value v = eval(*e.lhs);
        TyRef t = resolve(e.cast_ty);
        if (t->kind == Ty::Kind::Int) {
          if (v.kind == Value::Kind::Int) return v;
          return Value::of_int(float_to_int(v.f));
        }
        if (v.kind == Value::Kind::Float) return v;
        return Value::of_float(static_cast<double>(v.i));
      }
      case Expr::Kind::Call: {
        for (const auto& a : e.args) eval(*a);
        trap(TrapReason::InvalidOp);
      }
      case Expr::Kind::Ambig:
        trap(TrapReason::InvalidOp);
    }
    trap(TrapReason::InvalidOp);
  }

  Value eval_binary(const Expr& e) {
    if (e.bin_op == BinOp::And) {
      Value l = eval(*e.lhs);
      if (l.i == 0) return Value::of_int(0);
      Value r = eval(*e.rhs);
      return Value::of_int(r.i != 0 ? 1 : 0);
    }
    if (e.bin_op == BinOp::Or) {
      Value l = eval(*e.lhs);
      if (l.i != 0) return Value::of_int(1);
      Value r = eval(*e.rhs);
      return Value::of_int(r.i != 0 ? 1 : 0);
    }
    Value l = eval(*e.lhs);
    Value r = eval(*e.rhs);
    bool fl = l.kind == Value::Kind::Float;
    switch (e.bin_op) {
      case BinOp::Add:
        return fl ? Value::of_float(l.f + r.f)
                  : Value::of_int(wrap32(int64_t{l.i} + r.i));
      case BinOp::Sub:
        return fl ? Value::of_float(l.f - r.f)
                  : Value::of_int(wrap32(int64_t{l.i} - r.i));
      case BinOp::Mul:
        return fl ? Value::of_float(l.f * r.f)
                  : Value::of_int(wrap32(int64_t{l.i} * r.i));
      case BinOp::Div:
        if (fl) return Value::of_float(l.f / r.f);
        if (r.i == 0) trap(TrapReason::DivByZero);
        return Value::of_int(wrap32(int64_t{l.i} / r.i));
      case BinOp::Mod:
        if (r.i == 0) trap(TrapReason::DivByZero);
        return Value::of_int(wrap32(int64_t{l.i} % r.i));
      case BinOp::Lt:
        return Value::of_int(fl ? (l.f < r.f) : (l.i < r.i));
      case BinOp::Le:
        return Value::of_int(fl ? (l.f <= r.f) : (l.i <= r.i));
      case BinOp::Gt:
        return Value::of_int(fl ? (l.f > r.f) : (l.i > r.i));
      case BinOp::Ge:
        return Value::of_int(fl ? (l.f >= r.f) : (l.i >= r.i));
      case BinOp::Eq:
        return Value::of_int(fl ? (l.f == r.f) : (l.i == r.i));
      case BinOp::Ne:
        return Value::of_int(fl ? (l.f != r.f) : (l.i != r.i));
      default:
        trap(TrapReason::InvalidOp);
    }
  }
};

}  // namespace

Outcome interpret(const Ast& ast, const Inputs& inputs, uint64_t step_limit) {
  Interp in(ast, inputs, step_limit);
  return in.run();
}

}  // namespace declab::minic
