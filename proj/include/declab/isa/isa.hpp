#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace declab::isa {

enum class IsaId { REG, STK };
enum class OptLevel { O0, O2 };

// Signature tags carried in the assembler text so a program is runnable
// without its source: scalar int/float, pointer to int/float buffer.
enum class ArgKind { I, F, PI, PF };
enum class RetKind { I, F, V };

enum class Opcode {
  // shared ALU (REG: rd, ra, rb; STK: pop two, push one)
  Add, Sub, Mul, Div, Mod,
  FAdd, FSub, FMul, FDiv,
  CmpLt, CmpLe, CmpGt, CmpGe, CmpEq, CmpNe,
  Not,              // int logical not (REG: rd, ra; STK: pop, push)
  I2F, F2I,         // conversions (REG: rd, ra; STK: pop, push)
  // REG only
  Ldi, Ldf, Mov,
  Ld,               // ld rd, [ra + rb] | ld rd, [ra + #imm]
  St,               // st [ra + rb], rs | st [ra + #imm], rs
  Lea,              // lea rd, [ra + #imm]
  // STK only
  Push, PushF,
  LdLoc, StLoc,     // frame slot <-> stack
  LeaLoc,           // push address of frame slot ("lea #n" in text)
  Ldw, Stw,         // pop addr, push word / pop value, pop addr, store
  Pop,
  // control (both)
  Br, Brz, Brnz,
  Ret,
  Xcall,            // xcall name, #nargs — always traps when executed
};

struct Operand {
  enum class Kind { Reg, ImmInt, ImmFloat, Label, Mem };
  Kind kind = Kind::ImmInt;
  int reg = 0;            // Reg
  int32_t imm = 0;        // ImmInt, Mem immediate offset
  double fimm = 0.0;      // ImmFloat
  std::string label;      // Label (also the xcall callee name)
  int mem_base = 0;       // Mem base register
  bool mem_reg_off = false;
  int mem_off_reg = 0;    // Mem register offset when mem_reg_off

  static Operand make_reg(int r) { Operand o; o.kind = Kind::Reg; o.reg = r; return o; }
  static Operand make_imm(int32_t v) { Operand o; o.kind = Kind::ImmInt; o.imm = v; return o; }
  static Operand make_fimm(double v) { Operand o; o.kind = Kind::ImmFloat; o.fimm = v; return o; }
  static Operand make_label(std::string l) { Operand o; o.kind = Kind::Label; o.label = std::move(l); return o; }
  static Operand mem_imm(int base, int32_t off) {
    Operand o; o.kind = Kind::Mem; o.mem_base = base; o.imm = off; return o;
  }
  static Operand mem_reg(int base, int off_reg) {
    Operand o; o.kind = Kind::Mem; o.mem_base = base; o.mem_reg_off = true;
    o.mem_off_reg = off_reg; return o;
  }
};

struct Instr {
  std::string label;  // optional "name:" prefix
  Opcode op = Opcode::Ret;
  std::vector<Operand> ops;
};

struct AsmProgram {
  IsaId isa = IsaId::REG;
  std::string entry;
  std::vector<ArgKind> args;
  RetKind ret = RetKind::V;
  int32_t frame_words = 0;
  std::vector<std::string> strings;  // contents of ".str" segments, in order
  std::vector<Instr> instrs;
};

struct AsmError : std::runtime_error {
  int line;
  explicit AsmError(std::string msg, int line_ = 0)
      : std::runtime_error(std::move(msg)), line(line_) {}
};

const char* opcode_name(Opcode op);
const char* arg_kind_text(ArgKind k);  // i / f / pi / pf
const char* ret_kind_text(RetKind k);  // i / f / v

// Memory layout shared by the compiler and the VM: word addresses.
// Buffer k sits at 4096*(k+1); string j after the buffers; the locals
// frame high above everything. The wide gaps make stray offsets trap.
constexpr int32_t kBufferBase = 4096;
constexpr int32_t kFrameBase = 1 << 20;
inline int32_t buffer_address(int k) { return kBufferBase * (k + 1); }
inline int32_t string_address(int num_buffers, int j) {
  return kBufferBase * (num_buffers + 1 + j);
}

}  // namespace declab::isa
