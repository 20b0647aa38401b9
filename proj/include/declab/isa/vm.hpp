#pragma once

#include "declab/isa/isa.hpp"
#include "declab/minic/interp.hpp"

namespace declab::isa {

// Executes an assembler program against the same Inputs/Outcome vocabulary
// as the source interpreter. One step per executed instruction. Buffers
// live at their conventional addresses; the frame is zero-initialized.
// Word addresses wrap mod 2^32; any access outside a live segment traps.
minic::Outcome run_vm(const AsmProgram& prog, const minic::Inputs& inputs,
                      uint64_t step_limit);

}  // namespace declab::isa
