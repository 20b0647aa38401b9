#include "declab/isa/text.hpp"

#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "declab/minic/print.hpp"  // format_float

namespace declab::isa {

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::Mul: return "mul";
    case Opcode::Div: return "div";
    case Opcode::Mod: return "mod";
    case Opcode::FAdd: return "fadd";
    case Opcode::FSub: return "fsub";
    case Opcode::FMul: return "fmul";
    case Opcode::FDiv: return "fdiv";
    case Opcode::CmpLt: return "cmplt";
    case Opcode::CmpLe: return "cmple";
    case Opcode::CmpGt: return "cmpgt";
    case Opcode::CmpGe: return "cmpge";
    case Opcode::CmpEq: return "cmpeq";
    case Opcode::CmpNe: return "cmpne";
    case Opcode::Not: return "not";
    case Opcode::I2F: return "i2f";
    case Opcode::F2I: return "f2i";
    case Opcode::Ldi: return "ldi";
    case Opcode::Ldf: return "ldf";
    case Opcode::Mov: return "mov";
    case Opcode::Ld: return "ld";
    case Opcode::St: return "st";
    case Opcode::Lea: return "lea";
    case Opcode::Push: return "push";
    case Opcode::PushF: return "pushf";
    case Opcode::LdLoc: return "ldloc";
    case Opcode::StLoc: return "stloc";
    case Opcode::LeaLoc: return "lea";
    case Opcode::Ldw: return "ldw";
    case Opcode::Stw: return "stw";
    case Opcode::Pop: return "pop";
    case Opcode::Br: return "br";
    case Opcode::Brz: return "brz";
    case Opcode::Brnz: return "brnz";
    case Opcode::Ret: return "ret";
    case Opcode::Xcall: return "xcall";
  }
  return "?";
}

namespace {

std::string operand_text(const Operand& o) {
  switch (o.kind) {
    case Operand::Kind::Reg:
      return "r" + std::to_string(o.reg);
    case Operand::Kind::ImmInt:
      return "#" + std::to_string(o.imm);
    case Operand::Kind::ImmFloat:
      return "#" + minic::format_float(o.fimm);
    case Operand::Kind::Label:
      return o.label;
    case Operand::Kind::Mem:
      if (o.mem_reg_off)
        return "[r" + std::to_string(o.mem_base) + " + r" +
               std::to_string(o.mem_off_reg) + "]";
      return "[r" + std::to_string(o.mem_base) + " + #" +
             std::to_string(o.imm) + "]";
  }
  return "?";
}

}  // namespace

const char* arg_kind_text(ArgKind k) {
  switch (k) {
    case ArgKind::I: return "i";
    case ArgKind::F: return "f";
    case ArgKind::PI: return "pi";
    case ArgKind::PF: return "pf";
  }
  return "?";
}

const char* ret_kind_text(RetKind k) {
  switch (k) {
    case RetKind::I: return "i";
    case RetKind::F: return "f";
    case RetKind::V: return "v";
  }
  return "?";
}

std::string emit_asm(const AsmProgram& prog) {
  std::string out;
  out += ".isa ";
  out += (prog.isa == IsaId::REG) ? "REG" : "STK";
  out += "\n.entry " + prog.entry + "\n.args";
  for (size_t i = 0; i < prog.args.size(); ++i) {
    out += (i == 0) ? " " : ", ";
    out += arg_kind_text(prog.args[i]);
  }
  out += "\n.ret ";
  out += ret_kind_text(prog.ret);
  out += "\n.frame " + std::to_string(prog.frame_words) + "\n";
  for (const auto& s : prog.strings) out += ".str \"" + s + "\"\n";
  for (const auto& ins : prog.instrs) {
    if (!ins.label.empty()) {
      out += ins.label + ": ";
    } else {
      out += "  ";
    }
    out += opcode_name(ins.op);
    for (size_t i = 0; i < ins.ops.size(); ++i) {
      out += (i == 0) ? " " : ", ";
      out += operand_text(ins.ops[i]);
    }
    out += "\n";
  }
  return out;
}

namespace {

struct LineParser {
  std::string_view s;
  size_t i = 0;
  int line;

  explicit LineParser(std::string_view sv, int line_) : s(sv), line(line_) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw AsmError(msg, line);
  }
  void skip_ws() {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  }
  bool done() {
    skip_ws();
    return i >= s.size();
  }
  bool peek_is(char c) {
    skip_ws();
    return i < s.size() && s[i] == c;
  }
  void expect(char c) {
    skip_ws();
    if (i >= s.size() || s[i] != c)
      fail(std::string("expected '") + c + "'");
    ++i;
  }
  std::string word() {
    skip_ws();
    size_t j = i;
    while (j < s.size() && (isalnum(static_cast<unsigned char>(s[j])) ||
                            s[j] == '_'))
      ++j;
    if (j == i) fail("expected a name");
    std::string w(s.substr(i, j - i));
    i = j;
    return w;
  }
  int reg() {
    skip_ws();
    if (i >= s.size() || s[i] != 'r') fail("expected a register");
    ++i;
    int32_t v = 0;
    size_t j = i;
    while (j < s.size() && isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j == i) fail("expected a register number");
    auto [p, ec] = std::from_chars(s.data() + i, s.data() + j, v);
    (void)p;
    if (ec != std::errc() || v < 0 || v > 15) fail("register out of range");
    i = j;
    return v;
  }
  Operand imm() {
    skip_ws();
    if (i >= s.size() || s[i] != '#') fail("expected '#'");
    ++i;
    size_t j = i;
    if (j < s.size() && (s[j] == '-' || s[j] == '+')) ++j;
    bool is_float = false;
    while (j < s.size() &&
           (isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.' ||
            s[j] == 'e' || s[j] == 'E' ||
            ((s[j] == '+' || s[j] == '-') &&
             (s[j - 1] == 'e' || s[j - 1] == 'E')))) {
      if (s[j] == '.' || s[j] == 'e' || s[j] == 'E') is_float = true;
      ++j;
    }
    if (j == i) fail("expected a number after '#'");
    Operand o;
    if (is_float) {
      double v = 0;
      auto [p, ec] = std::from_chars(s.data() + i, s.data() + j, v);
      if (ec != std::errc() || p != s.data() + j) fail("bad float immediate");
      o = Operand::make_fimm(v);
    } else {
      int64_t v = 0;
      auto [p, ec] = std::from_chars(s.data() + i, s.data() + j, v);
      if (ec != std::errc() || p != s.data() + j || v < INT32_MIN ||
          v > INT32_MAX)
        fail("bad integer immediate");
      o = Operand::make_imm(static_cast<int32_t>(v));
    }
    i = j;
    return o;
  }
  Operand operand() {
    skip_ws();
    if (i >= s.size()) fail("missing operand");
    char c = s[i];
    if (c == '#') return imm();
    if (c == '[') {
      ++i;
      int base = reg();
      expect('+');
      skip_ws();
      Operand o;
      if (i < s.size() && s[i] == 'r') {
        o = Operand::mem_reg(base, reg());
      } else {
        Operand off = imm();
        if (off.kind != Operand::Kind::ImmInt)
          fail("memory offset must be an integer");
        o = Operand::mem_imm(base, off.imm);
      }
      expect(']');
      return o;
    }
    if (c == 'r' && i + 1 < s.size() &&
        isdigit(static_cast<unsigned char>(s[i + 1]))) {
      return Operand::make_reg(reg());
    }
    return Operand::make_label(word());
  }
};

Opcode lookup_opcode(const std::string& name, IsaId isa, int line) {
  static const std::map<std::string, Opcode> common = {
      {"add", Opcode::Add}, {"sub", Opcode::Sub}, {"mul", Opcode::Mul},
      {"div", Opcode::Div}, {"mod", Opcode::Mod}, {"fadd", Opcode::FAdd},
      {"fsub", Opcode::FSub}, {"fmul", Opcode::FMul}, {"fdiv", Opcode::FDiv},
      {"cmplt", Opcode::CmpLt}, {"cmple", Opcode::CmpLe},
      {"cmpgt", Opcode::CmpGt}, {"cmpge", Opcode::CmpGe},
      {"cmpeq", Opcode::CmpEq}, {"cmpne", Opcode::CmpNe},
      {"not", Opcode::Not}, {"i2f", Opcode::I2F}, {"f2i", Opcode::F2I},
      {"br", Opcode::Br}, {"brz", Opcode::Brz}, {"brnz", Opcode::Brnz},
      {"ret", Opcode::Ret}, {"xcall", Opcode::Xcall},
  };
  static const std::map<std::string, Opcode> reg_only = {
      {"ldi", Opcode::Ldi}, {"ldf", Opcode::Ldf}, {"mov", Opcode::Mov},
      {"ld", Opcode::Ld}, {"st", Opcode::St}, {"lea", Opcode::Lea},
  };
  static const std::map<std::string, Opcode> stk_only = {
      {"push", Opcode::Push}, {"pushf", Opcode::PushF},
      {"ldloc", Opcode::LdLoc}, {"stloc", Opcode::StLoc},
      {"lea", Opcode::LeaLoc}, {"ldw", Opcode::Ldw}, {"stw", Opcode::Stw},
      {"pop", Opcode::Pop},
  };
  if (auto it = common.find(name); it != common.end()) return it->second;
  const auto& table = (isa == IsaId::REG) ? reg_only : stk_only;
  if (auto it = table.find(name); it != table.end()) return it->second;
  throw AsmError("unknown opcode '" + name + "'", line);
}

// Expected operand shapes, encoded as strings: R=reg, I=int imm, F=float
// imm, M=mem, m=mem with immediate offset only, L=label.
std::string shape_for(Opcode op, IsaId isa) {
  if (isa == IsaId::REG) {
    switch (op) {
      case Opcode::Add: case Opcode::Sub: case Opcode::Mul: case Opcode::Div:
      case Opcode::Mod: case Opcode::FAdd: case Opcode::FSub:
      case Opcode::FMul: case Opcode::FDiv: case Opcode::CmpLt:
      case Opcode::CmpLe: case Opcode::CmpGt: case Opcode::CmpGe:
      case Opcode::CmpEq: case Opcode::CmpNe:
        return "RRR";
      case Opcode::Not: case Opcode::I2F: case Opcode::F2I:
      case Opcode::Mov:
        return "RR";
      case Opcode::Ldi: return "RI";
      case Opcode::Ldf: return "RF";
      case Opcode::Ld: return "RM";
      case Opcode::St: return "MR";
      case Opcode::Lea: return "Rm";
      case Opcode::Br: return "L";
      case Opcode::Brz: case Opcode::Brnz: return "RL";
      case Opcode::Ret: return "";
      case Opcode::Xcall: return "LI";
      default: return "!";
    }
  }
  switch (op) {
    case Opcode::Add: case Opcode::Sub: case Opcode::Mul: case Opcode::Div:
    case Opcode::Mod: case Opcode::FAdd: case Opcode::FSub: case Opcode::FMul:
    case Opcode::FDiv: case Opcode::CmpLt: case Opcode::CmpLe:
    case Opcode::CmpGt: case Opcode::CmpGe: case Opcode::CmpEq:
    case Opcode::CmpNe: case Opcode::Not: case Opcode::I2F: case Opcode::F2I:
    case Opcode::Ldw: case Opcode::Stw: case Opcode::Pop: case Opcode::Ret:
      return "";
    case Opcode::Push: return "I";
    case Opcode::PushF: return "F";
    case Opcode::LdLoc: case Opcode::StLoc: case Opcode::LeaLoc: return "I";
    case Opcode::Br: case Opcode::Brz: case Opcode::Brnz: return "L";
    case Opcode::Xcall: return "LI";
    default: return "!";
  }
}

void check_shape(const Instr& ins, IsaId isa, int line) {
  std::string shape = shape_for(ins.op, isa);
  if (shape == "!")
    throw AsmError(std::string("opcode '") + opcode_name(ins.op) +
                       "' not valid for this isa",
                   line);
  if (ins.ops.size() != shape.size())
    throw AsmError(std::string("wrong operand count for '") +
                       opcode_name(ins.op) + "'",
                   line);
  for (size_t i = 0; i < shape.size(); ++i) {
    const Operand& o = ins.ops[i];
    bool ok = false;
    switch (shape[i]) {
      case 'R': ok = o.kind == Operand::Kind::Reg; break;
      case 'I': ok = o.kind == Operand::Kind::ImmInt; break;
      case 'F': ok = o.kind == Operand::Kind::ImmFloat; break;
      case 'M': ok = o.kind == Operand::Kind::Mem; break;
      case 'm':
        ok = o.kind == Operand::Kind::Mem && !o.mem_reg_off;
        break;
      case 'L': ok = o.kind == Operand::Kind::Label; break;
    }
    if (!ok)
      throw AsmError(std::string("bad operand for '") + opcode_name(ins.op) +
                         "'",
                     line);
  }
}

}  // namespace

AsmProgram parse_asm(std::string_view text) {
  AsmProgram prog;
  bool saw_isa = false;
  int line_no = 0;
  size_t pos = 0;
  std::set<std::string> labels;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line = (eol == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    ++line_no;
    LineParser lp(line, line_no);
    if (lp.done()) continue;
    lp.skip_ws();
    if (line[lp.i] == '.') {
      ++lp.i;
      std::string d = lp.word();
      if (d == "isa") {
        std::string v = lp.word();
        if (v == "REG") prog.isa = IsaId::REG;
        else if (v == "STK") prog.isa = IsaId::STK;
        else lp.fail("unknown isa '" + v + "'");
        saw_isa = true;
      } else if (d == "entry") {
        prog.entry = lp.word();
      } else if (d == "args") {
        while (!lp.done()) {
          std::string k = lp.word();
          if (k == "i") prog.args.push_back(ArgKind::I);
          else if (k == "f") prog.args.push_back(ArgKind::F);
          else if (k == "pi") prog.args.push_back(ArgKind::PI);
          else if (k == "pf") prog.args.push_back(ArgKind::PF);
          else lp.fail("unknown arg kind '" + k + "'");
          if (lp.peek_is(',')) lp.expect(',');
        }
      } else if (d == "ret") {
        std::string k = lp.word();
        if (k == "i") prog.ret = RetKind::I;
        else if (k == "f") prog.ret = RetKind::F;
        else if (k == "v") prog.ret = RetKind::V;
        else lp.fail("unknown ret kind '" + k + "'");
      } else if (d == "frame") {
        lp.skip_ws();
        size_t j = lp.i;
        while (j < line.size() &&
               isdigit(static_cast<unsigned char>(line[j])))
          ++j;
        if (j == lp.i) lp.fail("'.frame' needs a count");
        int64_t v = 0;
        std::from_chars(line.data() + lp.i, line.data() + j, v);
        if (v < 0 || v > INT32_MAX) lp.fail("'.frame' count out of range");
        prog.frame_words = static_cast<int32_t>(v);
        lp.i = j;
      } else if (d == "str") {
        lp.skip_ws();
        if (lp.i >= line.size() || line[lp.i] != '"')
          lp.fail("'.str' needs a quoted string");
        size_t close = line.find('"', lp.i + 1);
        if (close == std::string_view::npos) lp.fail("unterminated string");
        prog.strings.emplace_back(line.substr(lp.i + 1, close - lp.i - 1));
      } else {
        lp.fail("unknown directive '." + d + "'");
      }
      continue;
    }
    if (!saw_isa) lp.fail("instruction before '.isa'");
    Instr ins;
    std::string first = lp.word();
    if (lp.peek_is(':')) {
      lp.expect(':');
      ins.label = first;
      if (!labels.insert(first).second)
        lp.fail("duplicate label '" + first + "'");
      if (lp.done()) lp.fail("label without an instruction");
      first = lp.word();
    }
    ins.op = lookup_opcode(first, prog.isa, line_no);
    while (!lp.done()) {
      ins.ops.push_back(lp.operand());
      if (lp.peek_is(',')) lp.expect(',');
    }
    check_shape(ins, prog.isa, line_no);
    prog.instrs.push_back(std::move(ins));
  }
  // Branch targets must exist exactly once (duplicates rejected above).
  for (const auto& ins : prog.instrs) {
    if (ins.op == Opcode::Br || ins.op == Opcode::Brz ||
        ins.op == Opcode::Brnz) {
      const std::string& target = ins.ops.back().label;
      if (!labels.count(target))
        throw AsmError("branch to missing label '" + target + "'", 0);
    }
  }
  return prog;
}

}  // namespace declab::isa
