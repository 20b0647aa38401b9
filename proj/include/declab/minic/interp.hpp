#pragma once

#include <cstdint>
#include <vector>

#include "declab/minic/ast.hpp"

namespace declab::minic {

// Runtime scalar/pointer value. Pointers are (segment, element offset):
// segment 0..B-1 are the caller's buffers, then one segment per string
// literal site, then the locals frame. Numeric pointer values never escape
// a run — outcomes expose only scalars.
struct Value {
  enum class Kind { Int, Float, Ptr, Void };
  Kind kind = Kind::Void;
  int32_t i = 0;
  double f = 0.0;
  int32_t seg = -1;
  int32_t off = 0;

  static Value of_int(int32_t v) { Value x; x.kind = Kind::Int; x.i = v; return x; }
  static Value of_float(double v) { Value x; x.kind = Kind::Float; x.f = v; return x; }
  static Value ptr(int32_t seg, int32_t off) {
    Value x; x.kind = Kind::Ptr; x.seg = seg; x.off = off; return x;
  }
  static Value void_v() { return Value{}; }
};

// Scalars in scalar-parameter order, buffers in pointer-parameter order.
// Buffer cells carry the element kind of the corresponding pointer type.
struct Inputs {
  std::vector<Value> scalars;
  std::vector<std::vector<Value>> buffers;
};

enum class TrapReason { None, DivByZero, OutOfBounds, InvalidOp };

struct Outcome {
  enum class Kind { Returned, Trap, StepLimit };
  Kind kind = Kind::Returned;
  TrapReason trap = TrapReason::None;
  Value ret;                                      // Returned only
  std::vector<std::vector<Value>> final_buffers;  // Returned and Trap
  uint64_t steps_used = 0;
};

// Big-step evaluation of a type-checked function. Every statement and
// every evaluated expression node costs one step; short-circuited operands
// cost nothing. Exceeding step_limit yields Kind::StepLimit (no buffers).
//
// Defined semantics where C leaves gaps:
//   - int arithmetic wraps mod 2^32; int div/mod by zero traps;
//     INT_MIN / -1 wraps (no trap).
//   - (int) from double truncates toward zero, NaN -> 0, out-of-range
//     saturates to INT_MIN/INT_MAX.
//   - out-of-bounds loads/stores trap; dereferencing a zero-initialized
//     pointer traps (OutOfBounds).
//   - calls to extern functions trap (InvalidOp) after argument evaluation.
Outcome interpret(const Ast& ast, const Inputs& inputs, uint64_t step_limit);

// Conversion helper shared with the VM so both sides agree bit-for-bit.
int32_t float_to_int(double f);

}  // namespace declab::minic
