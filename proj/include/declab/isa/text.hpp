#pragma once

#include <string>
#include <string_view>

#include "declab/isa/isa.hpp"

namespace declab::isa {

// Frozen textual syntax (docs/asm-format.md): directives first, then one
// instruction per line, two-space indented, optional "label: " prefix,
// ", " between operands, immediates prefixed with '#'.
std::string emit_asm(const AsmProgram& prog);

// Inverse of emit_asm; also accepts minor whitespace variations. Throws
// AsmError with a line number on malformed input, unknown opcodes, bad
// operand shapes, or branches to missing/duplicate labels.
AsmProgram parse_asm(std::string_view text);

}  // namespace declab::isa
