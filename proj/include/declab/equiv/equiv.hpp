#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "declab/isa/isa.hpp"
#include "declab/minic/interp.hpp"

namespace declab::equiv {

struct EquivConfig {
  int n_tests = 10;          // finite test-vector count F
  uint64_t input_seed = 0;
  int32_t int_lo = -100;     // scalar range, inclusive both ends
  int32_t int_hi = 100;
  int buffer_len = 8;
  uint64_t step_limit = 1000000;
  std::ostream* trace = nullptr;  // when set, one JSON line per test case
};

struct Verdict {
  enum class Kind { Pass, Fail, CompileError, NonTermination };
  Kind kind = Kind::Pass;
  int first_mismatch_index = -1;  // Fail
  std::string expected;           // Fail: rendered original outcome
  std::string actual;             // Fail: rendered hypothesis outcome
  std::string stage;              // CompileError: parse | typeinfer | compile
  std::string message;
  bool passed() const { return kind == Kind::Pass; }
};

const char* verdict_kind_name(Verdict::Kind k);

// Deterministic test inputs for an argument list. Case 0 is all zeros and
// zero-filled buffers; later cases draw scalars uniformly from the int
// range (reals for float arguments) and buffers of buffer_len elements.
// The list for a smaller n_tests is a prefix of the list for a larger one.
std::vector<minic::Inputs> gen_inputs(const std::vector<isa::ArgKind>& args,
                                      const EquivConfig& cfg);

std::string outcome_to_string(const minic::Outcome& o);

// Kind + trap reason + returned value + final buffers. Floats compare
// bit-for-bit after canonicalizing every NaN; steps_used is ignored.
bool outcome_equal(const minic::Outcome& a, const minic::Outcome& b);

// The correctness metric: complete the hypothesis's types, type-check,
// compile to original.isa at O0 (semantics, not code shape), and compare VM
// outcomes case by case against the original program. Never throws on bad
// hypotheses — every failure mode is a Verdict.
Verdict io_equivalent(const isa::AsmProgram& original,
                      const std::string& hypothesis_source,
                      const EquivConfig& cfg = {});

}  // namespace declab::equiv
