#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "declab/isa/compile.hpp"
#include "declab/minic/check.hpp"

namespace declab::isa {

namespace {

using minic::Ast;
using minic::BinOp;
using minic::Expr;
using minic::Stmt;
using minic::StmtPtr;
using minic::Ty;
using minic::TyRef;
using minic::UnOp;

ArgKind arg_kind_for(const TyRef& t) {
  TyRef r = minic::resolve(t);
  if (r->kind == Ty::Kind::Ptr)
    return minic::resolve(r->elem)->kind == Ty::Kind::Float ? ArgKind::PF
                                                            : ArgKind::PI;
  return r->kind == Ty::Kind::Float ? ArgKind::F : ArgKind::I;
}

bool is_float_ty(const TyRef& t) {
  return minic::resolve(t)->kind == Ty::Kind::Float;
}

// Register roles on REG: r0-r5 parameter arrival / O2 parameter homes,
// r6-r11 O2 local homes, r12 primary and r13 secondary expression
// scratch, r14 transient reload (never live across a sub-evaluation),
// r15 frame pointer.
constexpr int kFp = 15;

class Gen {
 public:
  Gen(const Ast& ast, IsaId isa, OptLevel opt)
      : ast_(ast), isa_(isa), opt_(opt) {}

  AsmProgram run() {
    prog_.isa = isa_;
    prog_.entry = ast_.name;
    for (const auto& p : ast_.params) {
      prog_.args.push_back(arg_kind_for(p.second));
      if (minic::resolve(p.second)->kind == Ty::Kind::Ptr) ++num_buffers_;
    }
    TyRef r = minic::resolve(ast_.ret);
    prog_.ret = (r->kind == Ty::Kind::Void)    ? RetKind::V
                : (r->kind == Ty::Kind::Float) ? RetKind::F
                                               : RetKind::I;

    for (const auto& s : ast_.body) collect_strings_stmt(*s);
    assign_storage();
    place_label(prog_.entry);
    prologue();
    gen_block(ast_.body);
    epilogue();
    fix_labels();
    prog_.frame_words = nslots_ + temp_max_;
    if (isa_ == IsaId::STK && opt_ == OptLevel::O0)
      prog_.frame_words = nslots_ + 1;  // the materialization slot
    return std::move(prog_);
  }

 private:
  const Ast& ast_;
  IsaId isa_;
  OptLevel opt_;
  AsmProgram prog_;

  int num_buffers_ = 0;
  std::map<std::string, int32_t> slot_;  // frame slot index
  std::map<std::string, int> home_;      // register home (REG O2 only)
  std::map<const Expr*, int> strid_;
  int32_t nslots_ = 0;
  int32_t temp_sp_ = 0, temp_max_ = 0;
  int label_n_ = 0;
  std::vector<std::string> pending_;
  std::map<std::string, std::string> alias_;

  // -- operand shorthands ---------------------------------------------------
  static Operand R(int r) { return Operand::make_reg(r); }
  static Operand I(int32_t v) { return Operand::make_imm(v); }
  static Operand F(double v) { return Operand::make_fimm(v); }
  static Operand L(std::string l) { return Operand::make_label(std::move(l)); }
  static Operand M(int base, int32_t off) { return Operand::mem_imm(base, off); }
  static Operand MR(int base, int off_reg) {
    return Operand::mem_reg(base, off_reg);
  }

  // -- emission -------------------------------------------------------------
  void emit(Opcode op, std::vector<Operand> ops = {}) {
    Instr ins;
    ins.op = op;
    ins.ops = std::move(ops);
    if (!pending_.empty()) {
      ins.label = pending_.front();
      for (size_t i = 1; i < pending_.size(); ++i)
        alias_[pending_[i]] = pending_.front();
      pending_.clear();
    }
    prog_.instrs.push_back(std::move(ins));
  }

  std::string new_label() {
    std::string l;
    do {
      l = "L" + std::to_string(label_n_++);
    } while (l == prog_.entry);
    return l;
  }

  void place_label(std::string l) { pending_.push_back(std::move(l)); }

  void fix_labels() {
    if (alias_.empty()) return;
    for (auto& ins : prog_.instrs) {
      if (ins.op != Opcode::Br && ins.op != Opcode::Brz &&
          ins.op != Opcode::Brnz)
        continue;
      std::string& target = ins.ops.back().label;
      auto it = alias_.find(target);
      if (it != alias_.end()) target = it->second;
    }
  }

  // -- storage --------------------------------------------------------------
  void collect_locals(const std::vector<StmtPtr>& body,
                      std::vector<std::string>& out) {
    for (const auto& s : body) {
      if (s->kind == Stmt::Kind::Decl) out.push_back(s->decl_name);
      if (s->for_init && s->for_init->kind == Stmt::Kind::Decl)
        out.push_back(s->for_init->decl_name);
      collect_locals(s->body, out);
      collect_locals(s->else_body, out);
    }
  }

  void collect_addressed(const Expr& e, std::set<std::string>& out) {
    if (e.kind == Expr::Kind::AddrOf) out.insert(e.name);
    if (e.lhs) collect_addressed(*e.lhs, out);
    if (e.rhs) collect_addressed(*e.rhs, out);
    for (const auto& a : e.args) collect_addressed(*a, out);
  }
  void collect_addressed_stmt(const Stmt& s, std::set<std::string>& out) {
    for (const Expr* e : {s.init.get(), s.target.get(), s.value.get(),
                          s.cond.get(), s.expr.get()})
      if (e) collect_addressed(*e, out);
    if (s.for_init) collect_addressed_stmt(*s.for_init, out);
    if (s.for_step) collect_addressed_stmt(*s.for_step, out);
    for (const auto& t : s.body) collect_addressed_stmt(*t, out);
    for (const auto& t : s.else_body) collect_addressed_stmt(*t, out);
  }

  void assign_storage() {
    std::vector<std::string> locals;
    collect_locals(ast_.body, locals);
    if (isa_ == IsaId::REG && opt_ == OptLevel::O2) {
      std::set<std::string> addressed;
      for (const auto& s : ast_.body) collect_addressed_stmt(*s, addressed);
      int k = 0;
      for (const auto& p : ast_.params) {
        if (addressed.count(p.first)) slot_[p.first] = nslots_++;
        else home_[p.first] = k;
        ++k;
      }
      int pool = 6;
      for (const auto& l : locals) {
        if (!addressed.count(l) && pool <= 11) home_[l] = pool++;
        else slot_[l] = nslots_++;
      }
    } else {
      for (const auto& p : ast_.params) slot_[p.first] = nslots_++;
      for (const auto& l : locals) slot_[l] = nslots_++;
    }
  }

  void collect_strings_expr(const Expr& e) {
    if (e.kind == Expr::Kind::StringLit) {
      strid_[&e] = static_cast<int>(prog_.strings.size());
      prog_.strings.push_back(e.str_val);
    }
    if (e.lhs) collect_strings_expr(*e.lhs);
    if (e.rhs) collect_strings_expr(*e.rhs);
    for (const auto& a : e.args) collect_strings_expr(*a);
  }
  void collect_strings_stmt(const Stmt& s) {
    for (const Expr* e : {s.init.get(), s.target.get(), s.value.get(),
                          s.cond.get(), s.expr.get()})
      if (e) collect_strings_expr(*e);
    if (s.for_init) collect_strings_stmt(*s.for_init);
    if (s.for_step) collect_strings_stmt(*s.for_step);
    for (const auto& t : s.body) collect_strings_stmt(*t);
    for (const auto& t : s.else_body) collect_strings_stmt(*t);
  }

  int32_t alloc_temp() {
    int32_t t = nslots_ + temp_sp_++;
    if (temp_sp_ > temp_max_) temp_max_ = temp_sp_;
    return t;
  }
  void release_temp() { --temp_sp_; }

  int32_t bounce_slot() const { return nslots_; }

  // Scratch registers available to an O2 expression; O0 always spills.
  std::vector<int> top_avail() const {
    if (opt_ == OptLevel::O2) return {13};
    return {};
  }
  static std::vector<int> rest(const std::vector<int>& avail) {
    return {avail.begin() + 1, avail.end()};
  }

  // -- function skeleton ----------------------------------------------------
  void prologue() {
    if (isa_ == IsaId::REG) {
      int k = 0;
      for (const auto& p : ast_.params) {
        auto it = slot_.find(p.first);
        if (it != slot_.end()) emit(Opcode::St, {M(kFp, it->second), R(k)});
        ++k;
      }
    } else {
      for (size_t k = ast_.params.size(); k-- > 0;)
        emit(Opcode::StLoc, {I(slot_.at(ast_.params[k].first))});
    }
  }

  void epilogue() {
    if (pending_.empty() && !prog_.instrs.empty() &&
        prog_.instrs.back().op == Opcode::Ret)
      return;
    if (isa_ == IsaId::REG) {
      emit(Opcode::Ldi, {R(0), I(0)});
      emit(Opcode::Ret);
    } else {
      emit(Opcode::Push, {I(0)});
      emit(Opcode::Ret);
    }
  }

  void gen_block(const std::vector<StmtPtr>& body) {
    for (const auto& s : body) gen_stmt(*s);
  }

  // -- statements -----------------------------------------------------------
  void gen_stmt(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Decl: {
        if (isa_ == IsaId::REG) {
          if (s.init) eval_reg(*s.init, 12, top_avail());
          else default_reg(12, s.decl_ty);
          store_var(s.decl_name, 12);
        } else {
          if (s.init) eval_stk(*s.init);
          else default_stk(s.decl_ty);
          emit(Opcode::StLoc, {I(slot_.at(s.decl_name))});
        }
        return;
      }
      case Stmt::Kind::Assign:
        gen_assign(*s.target, *s.value);
        return;
      case Stmt::Kind::If: {
        if (s.else_body.empty()) {
          std::string lend = new_label();
          branch_if_false(*s.cond, lend);
          gen_block(s.body);
          place_label(lend);
        } else {
          std::string lelse = new_label(), lend = new_label();
          branch_if_false(*s.cond, lelse);
          gen_block(s.body);
          emit(Opcode::Br, {L(lend)});
          place_label(lelse);
          gen_block(s.else_body);
          place_label(lend);
        }
        return;
      }
      case Stmt::Kind::While: {
        std::string lcond = new_label(), lend = new_label();
        place_label(lcond);
        branch_if_false(*s.cond, lend);
        gen_block(s.body);
        emit(Opcode::Br, {L(lcond)});
        place_label(lend);
        return;
      }
      case Stmt::Kind::For: {
        gen_stmt(*s.for_init);
        std::string lcond = new_label(), lend = new_label();
        place_label(lcond);
        branch_if_false(*s.cond, lend);
        gen_block(s.body);
        gen_stmt(*s.for_step);
        emit(Opcode::Br, {L(lcond)});
        place_label(lend);
        return;
      }
      case Stmt::Kind::Return: {
        if (s.expr) {
          if (isa_ == IsaId::REG) {
            eval_reg(*s.expr, 12, top_avail());
            emit(Opcode::Mov, {R(0), R(12)});
          } else {
            eval_stk(*s.expr);
          }
        }
        emit(Opcode::Ret);
        return;
      }
      case Stmt::Kind::ExprStmt: {
        if (isa_ == IsaId::REG) {
          eval_reg(*s.expr, 12, top_avail());
        } else {
          eval_stk(*s.expr);
          emit(Opcode::Pop);
        }
        return;
      }
      case Stmt::Kind::AmbigDecl:
        break;
    }
    throw std::logic_error("unexpected statement kind in codegen");
  }

  void branch_if_false(const Expr& cond, const std::string& target) {
    if (isa_ == IsaId::REG) {
      eval_reg(cond, 12, top_avail());
      emit(Opcode::Brz, {R(12), L(target)});
    } else {
      eval_stk(cond);
      emit(Opcode::Brz, {L(target)});
    }
  }

  void gen_assign(const Expr& target, const Expr& value) {
    if (isa_ == IsaId::REG) {
      switch (target.kind) {
        case Expr::Kind::Var:
          eval_reg(value, 12, top_avail());
          store_var(target.name, 12);
          return;
        case Expr::Kind::Index: {
          int32_t t1 = alloc_temp(), t2 = alloc_temp();
          eval_reg(*target.lhs, 12, top_avail());
          emit(Opcode::St, {M(kFp, t1), R(12)});
          eval_reg(*target.rhs, 12, top_avail());
          emit(Opcode::St, {M(kFp, t2), R(12)});
          eval_reg(value, 12, top_avail());
          emit(Opcode::Ld, {R(13), M(kFp, t1)});
          emit(Opcode::Ld, {R(14), M(kFp, t2)});
          emit(Opcode::St, {MR(13, 14), R(12)});
          release_temp();
          release_temp();
          return;
        }
        case Expr::Kind::Deref: {
          int32_t t1 = alloc_temp();
          eval_reg(*target.lhs, 12, top_avail());
          emit(Opcode::St, {M(kFp, t1), R(12)});
          eval_reg(value, 12, top_avail());
          emit(Opcode::Ld, {R(13), M(kFp, t1)});
          emit(Opcode::St, {M(13, 0), R(12)});
          release_temp();
          return;
        }
        default:
          break;
      }
    } else {
      switch (target.kind) {
        case Expr::Kind::Var:
          eval_stk(value);
          emit(Opcode::StLoc, {I(slot_.at(target.name))});
          return;
        case Expr::Kind::Index:
          eval_stk(*target.lhs);
          eval_stk(*target.rhs);
          emit(Opcode::Add);
          eval_stk(value);
          emit(Opcode::Stw);
          return;
        case Expr::Kind::Deref:
          eval_stk(*target.lhs);
          eval_stk(value);
          emit(Opcode::Stw);
          return;
        default:
          break;
      }
    }
    throw std::logic_error("unexpected assignment target in codegen");
  }

  void store_var(const std::string& name, int src) {
    auto h = home_.find(name);
    if (h != home_.end()) emit(Opcode::Mov, {R(h->second), R(src)});
    else emit(Opcode::St, {M(kFp, slot_.at(name)), R(src)});
  }

  void default_reg(int dst, const TyRef& ty) {
    if (is_float_ty(ty)) emit(Opcode::Ldf, {R(dst), F(0.0)});
    else emit(Opcode::Ldi, {R(dst), I(0)});
  }
  void default_stk(const TyRef& ty) {
    if (is_float_ty(ty)) emit(Opcode::PushF, {F(0.0)});
    else emit(Opcode::Push, {I(0)});
  }

  Opcode binop_opcode(const Expr& e) const {
    bool f = is_float_ty(e.lhs->ty);
    switch (e.bin_op) {
      case BinOp::Add: return f ? Opcode::FAdd : Opcode::Add;
      case BinOp::Sub: return f ? Opcode::FSub : Opcode::Sub;
      case BinOp::Mul: return f ? Opcode::FMul : Opcode::Mul;
      case BinOp::Div: return f ? Opcode::FDiv : Opcode::Div;
      case BinOp::Mod: return Opcode::Mod;
      case BinOp::Lt: return Opcode::CmpLt;
      case BinOp::Le: return Opcode::CmpLe;
      case BinOp::Gt: return Opcode::CmpGt;
      case BinOp::Ge: return Opcode::CmpGe;
      case BinOp::Eq: return Opcode::CmpEq;
      case BinOp::Ne: return Opcode::CmpNe;
      default: throw std::logic_error("not a direct binary opcode");
    }
  }

  // -- REG expressions: result lands in `dst`; `avail` lists scratch
  // registers the evaluation may also clobber. r14 is used only between
  // consecutive emissions, never across a recursive evaluation.
  void eval_reg(const Expr& e, int dst, std::vector<int> avail) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        emit(Opcode::Ldi, {R(dst), I(e.int_val)});
        return;
      case Expr::Kind::FloatLit:
        emit(Opcode::Ldf, {R(dst), F(e.float_val)});
        return;
      case Expr::Kind::StringLit:
        emit(Opcode::Ldi,
             {R(dst), I(string_address(num_buffers_, strid_.at(&e)))});
        return;
      case Expr::Kind::Var: {
        auto h = home_.find(e.name);
        if (h != home_.end()) emit(Opcode::Mov, {R(dst), R(h->second)});
        else emit(Opcode::Ld, {R(dst), M(kFp, slot_.at(e.name))});
        return;
      }
      case Expr::Kind::AddrOf:
        emit(Opcode::Lea, {R(dst), M(kFp, slot_.at(e.name))});
        return;
      case Expr::Kind::Unary:
        eval_reg(*e.lhs, dst, avail);
        if (e.un_op == UnOp::Not) {
          emit(Opcode::Not, {R(dst), R(dst)});
        } else if (is_float_ty(e.lhs->ty)) {
          emit(Opcode::Ldf, {R(14), F(-1.0)});
          emit(Opcode::FMul, {R(dst), R(14), R(dst)});
        } else {
          emit(Opcode::Ldi, {R(14), I(0)});
          emit(Opcode::Sub, {R(dst), R(14), R(dst)});
        }
        return;
      case Expr::Kind::Cast: {
        eval_reg(*e.lhs, dst, avail);
        bool to_f = is_float_ty(e.cast_ty), from_f = is_float_ty(e.lhs->ty);
        if (to_f && !from_f) emit(Opcode::I2F, {R(dst), R(dst)});
        else if (!to_f && from_f) emit(Opcode::F2I, {R(dst), R(dst)});
        return;
      }
      case Expr::Kind::Deref:
        eval_reg(*e.lhs, dst, avail);
        emit(Opcode::Ld, {R(dst), M(dst, 0)});
        return;
      case Expr::Kind::Index:
        if (!avail.empty()) {
          int r2 = avail.front();
          eval_reg(*e.lhs, dst, avail);
          eval_reg(*e.rhs, r2, rest(avail));
          emit(Opcode::Ld, {R(dst), MR(dst, r2)});
        } else {
          int32_t t = alloc_temp();
          eval_reg(*e.lhs, dst, {});
          emit(Opcode::St, {M(kFp, t), R(dst)});
          eval_reg(*e.rhs, dst, {});
          emit(Opcode::Ld, {R(14), M(kFp, t)});
          emit(Opcode::Ld, {R(dst), MR(14, dst)});
          release_temp();
        }
        return;
      case Expr::Kind::Binary: {
        if (minic::is_logical(e.bin_op)) {
          logical_reg(e, dst, avail);
          return;
        }
        Opcode op = binop_opcode(e);
        if (!avail.empty()) {
          int r2 = avail.front();
          eval_reg(*e.lhs, dst, avail);
          eval_reg(*e.rhs, r2, rest(avail));
          emit(op, {R(dst), R(dst), R(r2)});
        } else {
          int32_t t = alloc_temp();
          eval_reg(*e.lhs, dst, {});
          emit(Opcode::St, {M(kFp, t), R(dst)});
          eval_reg(*e.rhs, dst, {});
          emit(Opcode::Ld, {R(14), M(kFp, t)});
          emit(op, {R(dst), R(14), R(dst)});
          release_temp();
        }
        return;
      }
      case Expr::Kind::Call: {
        for (const auto& a : e.args) eval_reg(*a, dst, avail);
        emit(Opcode::Xcall,
             {L(e.name), I(static_cast<int32_t>(e.args.size()))});
        emit(Opcode::Ldi, {R(dst), I(0)});  // never reached; keeps dst defined
        return;
      }
      case Expr::Kind::Ambig:
        break;
    }
    throw std::logic_error("unexpected expression kind in codegen");
  }

  void logical_reg(const Expr& e, int dst, const std::vector<int>& avail) {
    std::string lshort = new_label(), lend = new_label();
    bool is_and = e.bin_op == BinOp::And;
    Opcode br = is_and ? Opcode::Brz : Opcode::Brnz;
    eval_reg(*e.lhs, dst, avail);
    emit(br, {R(dst), L(lshort)});
    eval_reg(*e.rhs, dst, avail);
    emit(br, {R(dst), L(lshort)});
    emit(Opcode::Ldi, {R(dst), I(is_and ? 1 : 0)});
    emit(Opcode::Br, {L(lend)});
    place_label(lshort);
    emit(Opcode::Ldi, {R(dst), I(is_and ? 0 : 1)});
    place_label(lend);
  }

  // -- STK expressions: result is pushed. O0 additionally bounces every
  // node's result through a frame slot, which is what makes it naive.
  void eval_stk(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        emit(Opcode::Push, {I(e.int_val)});
        break;
      case Expr::Kind::FloatLit:
        emit(Opcode::PushF, {F(e.float_val)});
        break;
      case Expr::Kind::StringLit:
        emit(Opcode::Push,
             {I(string_address(num_buffers_, strid_.at(&e)))});
        break;
      case Expr::Kind::Var:
        emit(Opcode::LdLoc, {I(slot_.at(e.name))});
        break;
      case Expr::Kind::AddrOf:
        emit(Opcode::LeaLoc, {I(slot_.at(e.name))});
        break;
      case Expr::Kind::Unary:
        if (e.un_op == UnOp::Not) {
          eval_stk(*e.lhs);
          emit(Opcode::Not);
        } else if (is_float_ty(e.lhs->ty)) {
          emit(Opcode::PushF, {F(-1.0)});
          eval_stk(*e.lhs);
          emit(Opcode::FMul);
        } else {
          emit(Opcode::Push, {I(0)});
          eval_stk(*e.lhs);
          emit(Opcode::Sub);
        }
        break;
      case Expr::Kind::Cast: {
        eval_stk(*e.lhs);
        bool to_f = is_float_ty(e.cast_ty), from_f = is_float_ty(e.lhs->ty);
        if (to_f && !from_f) emit(Opcode::I2F);
        else if (!to_f && from_f) emit(Opcode::F2I);
        break;
      }
      case Expr::Kind::Deref:
        eval_stk(*e.lhs);
        emit(Opcode::Ldw);
        break;
      case Expr::Kind::Index:
        eval_stk(*e.lhs);
        eval_stk(*e.rhs);
        emit(Opcode::Add);
        emit(Opcode::Ldw);
        break;
      case Expr::Kind::Binary:
        if (minic::is_logical(e.bin_op)) {
          logical_stk(e);
        } else {
          eval_stk(*e.lhs);
          eval_stk(*e.rhs);
          emit(binop_opcode(e));
        }
        break;
      case Expr::Kind::Call:
        for (const auto& a : e.args) eval_stk(*a);
        emit(Opcode::Xcall,
             {L(e.name), I(static_cast<int32_t>(e.args.size()))});
        emit(Opcode::Push, {I(0)});  // never reached; keeps the stack shape
        break;
      case Expr::Kind::Ambig:
        throw std::logic_error("unexpected expression kind in codegen");
    }
    if (opt_ == OptLevel::O0) {
      emit(Opcode::StLoc, {I(bounce_slot())});
      emit(Opcode::LdLoc, {I(bounce_slot())});
    }
  }

  void logical_stk(const Expr& e) {
    std::string lshort = new_label(), lend = new_label();
    bool is_and = e.bin_op == BinOp::And;
    Opcode br = is_and ? Opcode::Brz : Opcode::Brnz;
    eval_stk(*e.lhs);
    emit(br, {L(lshort)});
    eval_stk(*e.rhs);
    emit(br, {L(lshort)});
    emit(Opcode::Push, {I(is_and ? 1 : 0)});
    emit(Opcode::Br, {L(lend)});
    place_label(lshort);
    emit(Opcode::Push, {I(is_and ? 0 : 1)});
    place_label(lend);
  }
};

}  // namespace

AsmProgram compile(const minic::Ast& ast, IsaId isa, OptLevel opt) {
  minic::Ast work =
      (opt == OptLevel::O2) ? optimize_ast(ast) : minic::clone(ast);
  minic::check(work);  // validates and fills the expression types
  Gen g(work, isa, opt);
  return g.run();
}

}  // namespace declab::isa
