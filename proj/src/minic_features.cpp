#include "declab/minic/features.hpp"

#include "declab/minic/print.hpp"

namespace declab::minic {

FeatureVector extract_features(const Ast& ast, const std::string& asm_text) {
  FeatureVector fv;
  fv.c_length = static_cast<uint32_t>(pretty_print_function(ast).size());
  fv.num_func_args = static_cast<uint32_t>(ast.params.size());
  for (const auto& p : ast.params) {
    TyRef t = resolve(p.second);
    if (t && t->kind == Ty::Kind::Ptr) ++fv.num_pointers;
  }
  fv.asm_length = static_cast<uint32_t>(asm_text.size());
  return fv;
}

}  // namespace declab::minic
