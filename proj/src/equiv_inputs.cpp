#include "declab/common.hpp"
#include "declab/equiv/equiv.hpp"

namespace declab::equiv {

using minic::Inputs;
using minic::Value;

std::vector<Inputs> gen_inputs(const std::vector<isa::ArgKind>& args,
                               const EquivConfig& cfg) {
  Rng rng(cfg.input_seed);
  std::vector<Inputs> out;
  out.reserve(static_cast<size_t>(cfg.n_tests));
  for (int t = 0; t < cfg.n_tests; ++t) {
    Inputs in;
    bool zeros = t == 0;
    for (isa::ArgKind k : args) {
      switch (k) {
        case isa::ArgKind::I:
          in.scalars.push_back(Value::of_int(
              zeros ? 0
                    : static_cast<int32_t>(
                          rng.uniform_int(cfg.int_lo, cfg.int_hi))));
          break;
        case isa::ArgKind::F:
          in.scalars.push_back(Value::of_float(
              zeros ? 0.0 : rng.uniform_real(cfg.int_lo, cfg.int_hi)));
          break;
        case isa::ArgKind::PI: {
          std::vector<Value> buf;
          for (int j = 0; j < cfg.buffer_len; ++j)
            buf.push_back(Value::of_int(
                zeros ? 0
                      : static_cast<int32_t>(
                            rng.uniform_int(cfg.int_lo, cfg.int_hi))));
          in.buffers.push_back(std::move(buf));
          break;
        }
        case isa::ArgKind::PF: {
          std::vector<Value> buf;
          for (int j = 0; j < cfg.buffer_len; ++j)
            buf.push_back(Value::of_float(
                zeros ? 0.0 : rng.uniform_real(cfg.int_lo, cfg.int_hi)));
          in.buffers.push_back(std::move(buf));
          break;
        }
      }
    }
    out.push_back(std::move(in));
  }
  return out;
}

}  // namespace declab::equiv
