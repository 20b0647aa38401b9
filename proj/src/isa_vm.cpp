#include "declab/isa/vm.hpp"

#include <map>

#include "declab/common.hpp"

namespace declab::isa {

using minic::Outcome;
using minic::TrapReason;
using minic::Value;

namespace {

struct TrapEx { TrapReason reason; };
struct StepEx {};

struct Segment {
  int64_t base = 0;
  std::vector<Value> cells;
};

class Vm {
 public:
  Vm(const AsmProgram& prog, const minic::Inputs& inputs, uint64_t limit)
      : prog_(prog), limit_(limit) {
    size_t si = 0, bi = 0;
    std::vector<Value> param_values;
    for (ArgKind k : prog_.args) {
      switch (k) {
        case ArgKind::I:
        case ArgKind::F: {
          if (si >= inputs.scalars.size())
            throw std::invalid_argument("missing scalar input");
          Value v = inputs.scalars[si++];
          bool want_float = (k == ArgKind::F);
          if (want_float != (v.kind == Value::Kind::Float))
            throw std::invalid_argument("scalar input kind mismatch");
          param_values.push_back(v);
          break;
        }
        case ArgKind::PI:
        case ArgKind::PF: {
          if (bi >= inputs.buffers.size())
            throw std::invalid_argument("missing buffer input");
          Segment seg;
          seg.base = buffer_address(static_cast<int>(bi));
          seg.cells = inputs.buffers[bi];
          segments_.push_back(std::move(seg));
          param_values.push_back(
              Value::of_int(buffer_address(static_cast<int>(bi))));
          ++bi;
          break;
        }
      }
    }
    num_buffers_ = bi;
    for (size_t j = 0; j < prog_.strings.size(); ++j) {
      Segment seg;
      seg.base = string_address(static_cast<int>(bi), static_cast<int>(j));
      for (unsigned char c : prog_.strings[j])
        seg.cells.push_back(Value::of_int(static_cast<int32_t>(c)));
      seg.cells.push_back(Value::of_int(0));
      segments_.push_back(std::move(seg));
    }
    Segment frame;
    frame.base = kFrameBase;
    frame.cells.assign(static_cast<size_t>(prog_.frame_words),
                       Value::of_int(0));
    segments_.push_back(std::move(frame));

    for (size_t idx = 0; idx < prog_.instrs.size(); ++idx) {
      const std::string& l = prog_.instrs[idx].label;
      if (!l.empty()) {
        if (labels_.count(l)) throw AsmError("duplicate label '" + l + "'");
        labels_[l] = idx;
      }
    }
    auto it = labels_.find(prog_.entry);
    if (it == labels_.end())
      throw AsmError("entry label '" + prog_.entry + "' not found");
    pc_ = it->second;

    if (prog_.isa == IsaId::REG) {
      for (auto& r : regs_) r = Value::of_int(0);
      if (param_values.size() > 6)
        throw std::invalid_argument("too many parameters");
      for (size_t kk = 0; kk < param_values.size(); ++kk)
        regs_[kk] = param_values[kk];
      regs_[15] = Value::of_int(kFrameBase);
    } else {
      for (const Value& v : param_values) stack_.push_back(v);
    }
  }

  Outcome run() {
    Outcome out;
    try {
      for (;;) {
        if (pc_ >= prog_.instrs.size()) trap(TrapReason::InvalidOp);
        if (++steps_ > limit_) throw StepEx{};
        const Instr& ins = prog_.instrs[pc_];
        ++pc_;
        if (exec(ins, out.ret)) {
          finish(out, Outcome::Kind::Returned);
          return out;
        }
      }
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
  const AsmProgram& prog_;
  uint64_t limit_;
  uint64_t steps_ = 0;
  size_t pc_ = 0;
  Value regs_[16];
  std::vector<Value> stack_;
  std::vector<Segment> segments_;
  size_t num_buffers_ = 0;
  std::map<std::string, size_t> labels_;

  [[noreturn]] void trap(TrapReason r) const { throw TrapEx{r}; }

  void finish(Outcome& out, Outcome::Kind k) {
    out.kind = k;
    out.steps_used = steps_;
    out.final_buffers.clear();
    for (size_t b = 0; b < num_buffers_; ++b)
      out.final_buffers.push_back(segments_[b].cells);
  }

  Value mem_load(int32_t addr) {
    for (const auto& seg : segments_) {
      int64_t off = static_cast<int64_t>(addr) - seg.base;
      if (off >= 0 && off < static_cast<int64_t>(seg.cells.size()))
        return seg.cells[static_cast<size_t>(off)];
    }
    trap(TrapReason::OutOfBounds);
  }

  void mem_store(int32_t addr, const Value& v) {
    for (auto& seg : segments_) {
      int64_t off = static_cast<int64_t>(addr) - seg.base;
      if (off >= 0 && off < static_cast<int64_t>(seg.cells.size())) {
        seg.cells[static_cast<size_t>(off)] = v;
        return;
      }
    }
    trap(TrapReason::OutOfBounds);
  }

  int32_t as_int(const Value& v) {
    if (v.kind != Value::Kind::Int) trap(TrapReason::InvalidOp);
    return v.i;
  }
  double as_float(const Value& v) {
    if (v.kind != Value::Kind::Float) trap(TrapReason::InvalidOp);
    return v.f;
  }

  int32_t mem_addr(const Operand& o) {
    int32_t base = as_int(reg(o.mem_base));
    int32_t off = o.mem_reg_off ? as_int(reg(o.mem_off_reg)) : o.imm;
    return declab::wrap32(static_cast<int64_t>(base) + off);
  }

  Value& reg(int idx) { return regs_[idx]; }

  Value pop() {
    if (stack_.empty()) trap(TrapReason::InvalidOp);
    Value v = stack_.back();
    stack_.pop_back();
    return v;
  }
  void push(const Value& v) { stack_.push_back(v); }

  Value int_bin(Opcode op, const Value& a, const Value& b) {
    int64_t x = as_int(a), y = as_int(b);
    switch (op) {
      case Opcode::Add: return Value::of_int(declab::wrap32(x + y));
      case Opcode::Sub: return Value::of_int(declab::wrap32(x - y));
      case Opcode::Mul: return Value::of_int(declab::wrap32(x * y));
      case Opcode::Div:
        if (y == 0) trap(TrapReason::DivByZero);
        return Value::of_int(declab::wrap32(x / y));
      case Opcode::Mod:
        if (y == 0) trap(TrapReason::DivByZero);
        return Value::of_int(declab::wrap32(x % y));
      default: trap(TrapReason::InvalidOp);
    }
  }

  Value float_bin(Opcode op, const Value& a, const Value& b) {
    double x = as_float(a), y = as_float(b);
    switch (op) {
      case Opcode::FAdd: return Value::of_float(x + y);
      case Opcode::FSub: return Value::of_float(x - y);
      case Opcode::FMul: return Value::of_float(x * y);
      case Opcode::FDiv: return Value::of_float(x / y);
      default: trap(TrapReason::InvalidOp);
    }
  }

  Value cmp_bin(Opcode op, const Value& a, const Value& b) {
    if (a.kind != b.kind) trap(TrapReason::InvalidOp);
    bool r = false;
    if (a.kind == Value::Kind::Float) {
      switch (op) {
        case Opcode::CmpLt: r = a.f < b.f; break;
        case Opcode::CmpLe: r = a.f <= b.f; break;
        case Opcode::CmpGt: r = a.f > b.f; break;
        case Opcode::CmpGe: r = a.f >= b.f; break;
        case Opcode::CmpEq: r = a.f == b.f; break;
        case Opcode::CmpNe: r = a.f != b.f; break;
        default: trap(TrapReason::InvalidOp);
      }
    } else if (a.kind == Value::Kind::Int) {
      switch (op) {
        case Opcode::CmpLt: r = a.i < b.i; break;
        case Opcode::CmpLe: r = a.i <= b.i; break;
        case Opcode::CmpGt: r = a.i > b.i; break;
        case Opcode::CmpGe: r = a.i >= b.i; break;
        case Opcode::CmpEq: r = a.i == b.i; break;
        case Opcode::CmpNe: r = a.i != b.i; break;
        default: trap(TrapReason::InvalidOp);
      }
    } else {
      trap(TrapReason::InvalidOp);
    }
    return Value::of_int(r ? 1 : 0);
  }

  bool is_alu(Opcode op) {
    switch (op) {
      case Opcode::Add: case Opcode::Sub: case Opcode::Mul: case Opcode::Div:
      case Opcode::Mod: case Opcode::FAdd: case Opcode::FSub:
      case Opcode::FMul: case Opcode::FDiv: case Opcode::CmpLt:
      case Opcode::CmpLe: case Opcode::CmpGt: case Opcode::CmpGe:
      case Opcode::CmpEq: case Opcode::CmpNe:
        return true;
      default:
        return false;
    }
  }

  Value alu(Opcode op, const Value& a, const Value& b) {
    switch (op) {
      case Opcode::Add: case Opcode::Sub: case Opcode::Mul:
      case Opcode::Div: case Opcode::Mod:
        return int_bin(op, a, b);
      case Opcode::FAdd: case Opcode::FSub: case Opcode::FMul:
      case Opcode::FDiv:
        return float_bin(op, a, b);
      default:
        return cmp_bin(op, a, b);
    }
  }

  void jump(const std::string& target) {
    auto it = labels_.find(target);
    if (it == labels_.end()) trap(TrapReason::InvalidOp);
    pc_ = it->second;
  }

  // Returns true on ret; fills `ret`.
  bool exec(const Instr& ins, Value& ret) {
    if (prog_.isa == IsaId::REG) return exec_reg(ins, ret);
    return exec_stk(ins, ret);
  }

  Value make_ret(const Value& top) {
    switch (prog_.ret) {
      case RetKind::I:
        if (top.kind != Value::Kind::Int) trap(TrapReason::InvalidOp);
        return top;
      case RetKind::F:
        if (top.kind != Value::Kind::Float) trap(TrapReason::InvalidOp);
        return top;
      case RetKind::V:
        return Value::void_v();
    }
    return Value::void_v();
  }

  bool exec_reg(const Instr& ins, Value& ret) {
    const auto& ops = ins.ops;
    if (is_alu(ins.op)) {
      reg(ops[0].reg) = alu(ins.op, reg(ops[1].reg), reg(ops[2].reg));
      return false;
    }
    switch (ins.op) {
      case Opcode::Ldi: reg(ops[0].reg) = Value::of_int(ops[1].imm); break;
      case Opcode::Ldf: reg(ops[0].reg) = Value::of_float(ops[1].fimm); break;
      case Opcode::Mov: reg(ops[0].reg) = reg(ops[1].reg); break;
      case Opcode::Not:
        reg(ops[0].reg) = Value::of_int(as_int(reg(ops[1].reg)) == 0 ? 1 : 0);
        break;
      case Opcode::I2F:
        reg(ops[0].reg) =
            Value::of_float(static_cast<double>(as_int(reg(ops[1].reg))));
        break;
      case Opcode::F2I:
        reg(ops[0].reg) =
            Value::of_int(minic::float_to_int(as_float(reg(ops[1].reg))));
        break;
      case Opcode::Ld:
        reg(ops[0].reg) = mem_load(mem_addr(ops[1]));
        break;
      case Opcode::St: {
        int32_t addr = mem_addr(ops[0]);
        mem_store(addr, reg(ops[1].reg));
        break;
      }
      case Opcode::Lea:
        reg(ops[0].reg) = Value::of_int(mem_addr(ops[1]));
        break;
      case Opcode::Br: jump(ops[0].label); break;
      case Opcode::Brz:
        if (as_int(reg(ops[0].reg)) == 0) jump(ops[1].label);
        break;
      case Opcode::Brnz:
        if (as_int(reg(ops[0].reg)) != 0) jump(ops[1].label);
        break;
      case Opcode::Ret:
        ret = make_ret(regs_[0]);
        return true;
      case Opcode::Xcall:
        trap(TrapReason::InvalidOp);
      default:
        trap(TrapReason::InvalidOp);
    }
    return false;
  }

  bool exec_stk(const Instr& ins, Value& ret) {
    const auto& ops = ins.ops;
    if (is_alu(ins.op)) {
      Value b = pop();
      Value a = pop();
      push(alu(ins.op, a, b));
      return false;
    }
    switch (ins.op) {
      case Opcode::Push: push(Value::of_int(ops[0].imm)); break;
      case Opcode::PushF: push(Value::of_float(ops[0].fimm)); break;
      case Opcode::Not:
        push(Value::of_int(as_int(pop()) == 0 ? 1 : 0));
        break;
      case Opcode::I2F:
        push(Value::of_float(static_cast<double>(as_int(pop()))));
        break;
      case Opcode::F2I:
        push(Value::of_int(minic::float_to_int(as_float(pop()))));
        break;
      case Opcode::LdLoc:
        push(mem_load(declab::wrap32(int64_t{kFrameBase} + ops[0].imm)));
        break;
      case Opcode::StLoc: {
        Value v = pop();
        mem_store(declab::wrap32(int64_t{kFrameBase} + ops[0].imm), v);
        break;
      }
      case Opcode::LeaLoc:
        push(Value::of_int(declab::wrap32(int64_t{kFrameBase} + ops[0].imm)));
        break;
      case Opcode::Ldw:
        push(mem_load(as_int(pop())));
        break;
      case Opcode::Stw: {
        Value v = pop();
        int32_t addr = as_int(pop());
        mem_store(addr, v);
        break;
      }
      case Opcode::Pop:
        pop();
        break;
      case Opcode::Br: jump(ops[0].label); break;
      case Opcode::Brz:
        if (as_int(pop()) == 0) jump(ops[0].label);
        break;
      case Opcode::Brnz:
        if (as_int(pop()) != 0) jump(ops[0].label);
        break;
      case Opcode::Ret:
        ret = make_ret(prog_.ret == RetKind::V ? Value::void_v() : pop());
        return true;
      case Opcode::Xcall:
        trap(TrapReason::InvalidOp);
      default:
        trap(TrapReason::InvalidOp);
    }
    return false;
  }
};

}  // namespace

Outcome run_vm(const AsmProgram& prog, const minic::Inputs& inputs,
               uint64_t step_limit) {
  Vm vm(prog, inputs, step_limit);
  return vm.run();
}

}  // namespace declab::isa
