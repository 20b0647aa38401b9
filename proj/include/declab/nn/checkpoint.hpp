#pragma once

#include <string>

#include "declab/nn/model.hpp"

namespace declab::nn {

struct CheckpointError : std::runtime_error {
  explicit CheckpointError(const std::string& m) : std::runtime_error(m) {}
};

// Text header (format tag, config key-value lines, "end"), then every
// parameter matrix as raw little-endian float32 in visit order.
void save_model(const ModelParams<float>& p, const std::string& path);
ModelParams<float> load_model(const std::string& path);

}  // namespace declab::nn
