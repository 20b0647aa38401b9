#pragma once

#include <cstdint>
#include <string>

#include "declab/minic/ast.hpp"

namespace declab::minic {

struct FeatureVector {
  uint32_t c_length = 0;      // bytes of the canonical function text
  uint32_t num_func_args = 0;
  uint32_t num_pointers = 0;  // pointer-typed parameters
  uint32_t asm_length = 0;    // bytes of the assembler text
};

FeatureVector extract_features(const Ast& ast, const std::string& asm_text);

}  // namespace declab::minic
