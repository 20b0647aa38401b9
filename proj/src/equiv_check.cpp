#include <bit>
#include <cmath>
#include <ostream>

#include "declab/equiv/equiv.hpp"
#include "declab/isa/compile.hpp"
#include "declab/isa/vm.hpp"
#include "declab/minic/lexer.hpp"
#include "declab/minic/parse.hpp"
#include "declab/minic/print.hpp"
#include "declab/ti/ti.hpp"

namespace declab::equiv {

using minic::Inputs;
using minic::Outcome;
using minic::Value;

const char* verdict_kind_name(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Pass: return "Pass";
    case Verdict::Kind::Fail: return "Fail";
    case Verdict::Kind::CompileError: return "CompileError";
    case Verdict::Kind::NonTermination: return "NonTermination";
  }
  return "?";
}

namespace {

const char* trap_name(minic::TrapReason r) {
  switch (r) {
    case minic::TrapReason::None: return "None";
    case minic::TrapReason::DivByZero: return "DivByZero";
    case minic::TrapReason::OutOfBounds: return "OutOfBounds";
    case minic::TrapReason::InvalidOp: return "InvalidOp";
  }
  return "?";
}

std::string value_to_string(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Int: return std::to_string(v.i);
    case Value::Kind::Float: return minic::format_float(v.f);
    case Value::Kind::Ptr:
      return "ptr(" + std::to_string(v.seg) + "," + std::to_string(v.off) +
             ")";
    case Value::Kind::Void: return "void";
  }
  return "?";
}

bool value_equal(const Value& a, const Value& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Value::Kind::Int: return a.i == b.i;
    case Value::Kind::Float: {
      if (std::isnan(a.f) && std::isnan(b.f)) return true;
      return std::bit_cast<uint64_t>(a.f) == std::bit_cast<uint64_t>(b.f);
    }
    case Value::Kind::Ptr: return a.seg == b.seg && a.off == b.off;
    case Value::Kind::Void: return true;
  }
  return false;
}

std::string signature_text(const isa::AsmProgram& p) {
  std::string s = "(";
  for (size_t i = 0; i < p.args.size(); ++i) {
    if (i) s += ", ";
    s += isa::arg_kind_text(p.args[i]);
  }
  s += ") -> ";
  s += isa::ret_kind_text(p.ret);
  return s;
}

// Minimal JSON for the per-case trace; all content is numeric or drawn from
// fixed words, so no string escaping is needed.
std::string inputs_json(const Inputs& in) {
  std::string s = "{\"scalars\":[";
  for (size_t i = 0; i < in.scalars.size(); ++i) {
    if (i) s += ",";
    s += value_to_string(in.scalars[i]);
  }
  s += "],\"buffers\":[";
  for (size_t b = 0; b < in.buffers.size(); ++b) {
    if (b) s += ",";
    s += "[";
    for (size_t j = 0; j < in.buffers[b].size(); ++j) {
      if (j) s += ",";
      s += value_to_string(in.buffers[b][j]);
    }
    s += "]";
  }
  s += "]}";
  return s;
}

}  // namespace

std::string outcome_to_string(const Outcome& o) {
  std::string s;
  switch (o.kind) {
    case Outcome::Kind::Returned:
      s = o.ret.kind == Value::Kind::Void ? "ret void"
                                          : "ret " + value_to_string(o.ret);
      break;
    case Outcome::Kind::Trap:
      s = std::string("trap ") + trap_name(o.trap);
      break;
    case Outcome::Kind::StepLimit:
      return "step limit";
  }
  for (const auto& buf : o.final_buffers) {
    s += " [";
    for (size_t j = 0; j < buf.size(); ++j) {
      if (j) s += " ";
      s += value_to_string(buf[j]);
    }
    s += "]";
  }
  return s;
}

bool outcome_equal(const Outcome& a, const Outcome& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Outcome::Kind::StepLimit) return true;
  if (a.kind == Outcome::Kind::Trap && a.trap != b.trap) return false;
  if (a.kind == Outcome::Kind::Returned && !value_equal(a.ret, b.ret))
    return false;
  if (a.final_buffers.size() != b.final_buffers.size()) return false;
  for (size_t i = 0; i < a.final_buffers.size(); ++i) {
    const auto& ba = a.final_buffers[i];
    const auto& bb = b.final_buffers[i];
    if (ba.size() != bb.size()) return false;
    for (size_t j = 0; j < ba.size(); ++j)
      if (!value_equal(ba[j], bb[j])) return false;
  }
  return true;
}

Verdict io_equivalent(const isa::AsmProgram& original,
                      const std::string& hypothesis_source,
                      const EquivConfig& cfg) {
  Verdict v;

  ti::Completion comp = ti::complete_program(hypothesis_source);
  if (comp.status != ti::Completion::Status::Completed) {
    v.kind = Verdict::Kind::CompileError;
    v.stage = comp.failure == ti::Failure::Syntax ||
                      comp.failure == ti::Failure::Unsupported
                  ? "parse"
                  : "typeinfer";
    v.message = comp.message;
    return v;
  }

  isa::AsmProgram recompiled;
  try {
    minic::Ast fn = minic::parse_function(comp.source);
    recompiled = isa::compile(fn, original.isa, isa::OptLevel::O0);
  } catch (const minic::Diag& d) {
    v.kind = Verdict::Kind::CompileError;
    v.stage = "compile";
    v.message = d.what();
    return v;
  } catch (const isa::AsmError& e) {
    v.kind = Verdict::Kind::CompileError;
    v.stage = "compile";
    v.message = e.what();
    return v;
  }

  if (recompiled.args != original.args || recompiled.ret != original.ret) {
    v.kind = Verdict::Kind::Fail;
    v.first_mismatch_index = 0;
    v.expected = "signature " + signature_text(original);
    v.actual = "signature " + signature_text(recompiled);
    v.message = "signatures differ";
    return v;
  }

  std::vector<Inputs> inputs = gen_inputs(original.args, cfg);
  for (size_t i = 0; i < inputs.size(); ++i) {
    Outcome want = isa::run_vm(original, inputs[i], cfg.step_limit);
    Outcome got = isa::run_vm(recompiled, inputs[i], cfg.step_limit);
    if (cfg.trace) {
      *cfg.trace << "{\"case\":" << i
                 << ",\"input\":" << inputs_json(inputs[i])
                 << ",\"expected\":\"" << outcome_to_string(want)
                 << "\",\"actual\":\"" << outcome_to_string(got) << "\"}\n";
    }
    if (got.kind == Outcome::Kind::StepLimit) {
      v.kind = Verdict::Kind::NonTermination;
      v.first_mismatch_index = static_cast<int>(i);
      v.message =
          "hypothesis exceeded the step limit on case " + std::to_string(i);
      return v;
    }
    if (!outcome_equal(want, got)) {
      v.kind = Verdict::Kind::Fail;
      v.first_mismatch_index = static_cast<int>(i);
      v.expected = outcome_to_string(want);
      v.actual = outcome_to_string(got);
      return v;
    }
  }
  v.kind = Verdict::Kind::Pass;
  return v;
}

}  // namespace declab::equiv
