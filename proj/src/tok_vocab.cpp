#include <fstream>
#include <sstream>
#include <stdexcept>

#include "declab/tok/tok.hpp"

namespace declab::tok {

namespace {
constexpr const char* kHeaderTag = "declab-vocab";
constexpr int kFormatVersion = 1;
}  // namespace

std::string vocab_to_text(const Vocab& v) {
  std::ostringstream out;
  out.precision(17);
  out << kHeaderTag << ' ' << kFormatVersion << ' ' << v.size() << '\n';
  for (const auto& [piece, lp] : v.pieces) out << piece << '\t' << lp << '\n';
  return out.str();
}

Vocab vocab_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("empty vocabulary file");
  std::istringstream hs(header);
  std::string tag;
  int version = 0;
  size_t size = 0;
  hs >> tag >> version >> size;
  if (tag != kHeaderTag || version != kFormatVersion)
    throw std::runtime_error("unrecognized vocabulary header: " + header);

  Vocab v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("malformed vocabulary line: " + line);
    v.pieces.emplace_back(line.substr(0, tab),
                          std::stod(line.substr(tab + 1)));
  }
  if (v.pieces.size() != size)
    throw std::runtime_error("vocabulary size mismatch: header says " +
                             std::to_string(size) + ", file has " +
                             std::to_string(v.pieces.size()));
  v.rebuild_index();
  return v;
}

void save_vocab(const Vocab& v, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << vocab_to_text(v);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Vocab load_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return vocab_from_text(buf.str());
}

}  // namespace declab::tok
