#include "declab/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <vector>

namespace declab::nn {

namespace {

constexpr const char* kMagic = "declab-model 1";

}  // namespace

void save_model(const ModelParams<float>& p, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CheckpointError("cannot open '" + path + "' for writing");
  os << kMagic << '\n'
     << "enc_layers " << p.cfg.enc_layers << '\n'
     << "dec_layers " << p.cfg.dec_layers << '\n'
     << "d_model " << p.cfg.d_model << '\n'
     << "heads " << p.cfg.heads << '\n'
     << "ffn_dim " << p.cfg.ffn_dim << '\n'
     << "max_positions " << p.cfg.max_positions << '\n'
     << "vocab_size " << p.cfg.vocab_size << '\n'
     << "end\n";
  visit_params(p, [&](const std::string&, const Mat<float>& m) {
    std::vector<unsigned char> buf;
    buf.reserve(static_cast<size_t>(m.size()) * 4);
    const float* data = m.data();
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      uint32_t u = std::bit_cast<uint32_t>(data[i]);
      buf.push_back(static_cast<unsigned char>(u & 0xff));
      buf.push_back(static_cast<unsigned char>((u >> 8) & 0xff));
      buf.push_back(static_cast<unsigned char>((u >> 16) & 0xff));
      buf.push_back(static_cast<unsigned char>((u >> 24) & 0xff));
    }
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size()));
  });
  if (!os) throw CheckpointError("write failed for '" + path + "'");
}

ModelParams<float> load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line) || line != kMagic)
    throw CheckpointError("'" + path + "' is not a model checkpoint");
  ModelConfig cfg;
  bool saw_end = false;
  while (std::getline(is, line)) {
    if (line == "end") {
      saw_end = true;
      break;
    }
    std::istringstream ls(line);
    std::string key;
    long long value = 0;
    if (!(ls >> key >> value))
      throw CheckpointError("malformed header line '" + line + "'");
    if (key == "enc_layers")
      cfg.enc_layers = static_cast<int>(value);
    else if (key == "dec_layers")
      cfg.dec_layers = static_cast<int>(value);
    else if (key == "d_model")
      cfg.d_model = static_cast<int>(value);
    else if (key == "heads")
      cfg.heads = static_cast<int>(value);
    else if (key == "ffn_dim")
      cfg.ffn_dim = static_cast<int>(value);
    else if (key == "max_positions")
      cfg.max_positions = static_cast<int>(value);
    else if (key == "vocab_size")
      cfg.vocab_size = static_cast<int>(value);
    else
      throw CheckpointError("unknown header key '" + key + "'");
  }
  if (!saw_end) throw CheckpointError("checkpoint header has no 'end' line");

  ModelParams<float> p;
  try {
    detail::shape_params(p, cfg);
  } catch (const ShapeMismatch& e) {
    throw CheckpointError(std::string("invalid checkpoint config: ") +
                          e.what());
  }
  visit_params(p, [&](const std::string& name, Mat<float>& m) {
    std::vector<unsigned char> buf(static_cast<size_t>(m.size()) * 4);
    if (!is.read(reinterpret_cast<char*>(buf.data()),
                 static_cast<std::streamsize>(buf.size())))
      throw CheckpointError("checkpoint truncated in " + name);
    float* data = m.data();
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      size_t o = static_cast<size_t>(i) * 4;
      uint32_t u = static_cast<uint32_t>(buf[o]) |
                   (static_cast<uint32_t>(buf[o + 1]) << 8) |
                   (static_cast<uint32_t>(buf[o + 2]) << 16) |
                   (static_cast<uint32_t>(buf[o + 3]) << 24);
      data[i] = std::bit_cast<float>(u);
    }
  });
  char extra;
  if (is.read(&extra, 1))
    throw CheckpointError("trailing bytes after parameters");
  return p;
}

}  // namespace declab::nn
