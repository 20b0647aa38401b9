#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "declab/pipeline/pipeline.hpp"

namespace declab::pipeline {

namespace {

int64_t parse_i64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad integer for '" + key + "': " + v);
  }
}

int parse_int_min(const std::string& key, const std::string& v, int64_t lo) {
  int64_t x = parse_i64(key, v);
  if (x < lo || x > INT32_MAX)
    throw ConfigError("'" + key + "' out of range: " + v);
  return static_cast<int>(x);
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
  if (!v.empty() && v[0] == '-')
    throw ConfigError("'" + key + "' must be non-negative: " + v);
  try {
    size_t pos = 0;
    unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad integer for '" + key + "': " + v);
  }
}

double parse_f64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad number for '" + key + "': " + v);
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw ConfigError("bad flag for '" + key + "': " + v);
}

// Shortest decimal form that parses back to exactly the same double.
std::string fmt_f64(double x) {
  char buf[64];
  for (int prec : {6, 9, 12, 17}) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.train.batch_size = 32;
  cfg.train.max_steps = 20000;
  // One BOS plus max_decode_len content/EOS tokens fills max_positions.
  cfg.beam.max_decode_len = 255;
  return cfg;
}

isa::IsaId isa_from_name(const std::string& name) {
  if (name == "REG") return isa::IsaId::REG;
  if (name == "STK") return isa::IsaId::STK;
  throw ConfigError("unknown isa '" + name + "' (expected REG or STK)");
}

isa::OptLevel opt_from_name(const std::string& name) {
  if (name == "O0") return isa::OptLevel::O0;
  if (name == "O2") return isa::OptLevel::O2;
  throw ConfigError("unknown opt '" + name + "' (expected O0 or O2)");
}

void set_config_key(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  if (key == "gen_seed") {
    cfg.gen_seed = parse_u64(key, value);
  } else if (key == "n_functions") {
    cfg.n_functions = parse_int_min(key, value, 1);
  } else if (key == "isa") {
    isa_from_name(value);
    cfg.isa = value;
  } else if (key == "opt") {
    opt_from_name(value);
    cfg.opt = value;
  } else if (key == "vocab_size") {
    cfg.vocab_size = static_cast<size_t>(parse_int_min(key, value, 1));
  } else if (key == "enc_layers") {
    cfg.model.enc_layers = parse_int_min(key, value, 1);
  } else if (key == "dec_layers") {
    cfg.model.dec_layers = parse_int_min(key, value, 1);
  } else if (key == "d_model") {
    cfg.model.d_model = parse_int_min(key, value, 1);
  } else if (key == "heads") {
    cfg.model.heads = parse_int_min(key, value, 1);
  } else if (key == "ffn_dim") {
    cfg.model.ffn_dim = parse_int_min(key, value, 1);
  } else if (key == "max_positions") {
    cfg.model.max_positions = parse_int_min(key, value, 2);
  } else if (key == "batch_size") {
    cfg.train.batch_size = parse_int_min(key, value, 1);
  } else if (key == "learning_rate") {
    double lr = parse_f64(key, value);
    if (!(lr > 0.0)) throw ConfigError("'learning_rate' must be positive");
    cfg.train.learning_rate = lr;
  } else if (key == "warmup_steps") {
    cfg.train.warmup_steps = parse_int_min(key, value, 0);
  } else if (key == "max_steps") {
    cfg.train.max_steps = parse_int_min(key, value, 1);
  } else if (key == "train_seed") {
    cfg.train.seed = parse_u64(key, value);
  } else if (key == "beam_k") {
    cfg.beam.k = parse_int_min(key, value, 1);
  } else if (key == "max_decode_len") {
    cfg.beam.max_decode_len = parse_int_min(key, value, 1);
  } else if (key == "n_tests") {
    cfg.equiv.n_tests = parse_int_min(key, value, 1);
  } else if (key == "input_seed") {
    cfg.equiv.input_seed = parse_u64(key, value);
  } else if (key == "buffer_len") {
    cfg.equiv.buffer_len = parse_int_min(key, value, 1);
  } else if (key == "step_limit") {
    uint64_t lim = parse_u64(key, value);
    if (lim == 0) throw ConfigError("'step_limit' must be positive");
    cfg.equiv.step_limit = lim;
  } else if (key == "type_inference") {
    cfg.type_inference = parse_bool(key, value);
  } else if (key == "jobs") {
    cfg.jobs = parse_int_min(key, value, 1);
  } else if (key == "out_dir") {
    if (value.empty()) throw ConfigError("'out_dir' must not be empty");
    cfg.out_dir = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg = default_config();
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t sep = line.find_first_of(" \t");
    if (sep == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": key '" + line +
                        "' has no value");
    std::string key = line.substr(0, sep);
    std::string value = trim(line.substr(sep + 1));
    set_config_key(cfg, key, value);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return parse_config_text(os.str());
}

std::string config_to_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "gen_seed " << cfg.gen_seed << '\n';
  os << "n_functions " << cfg.n_functions << '\n';
  os << "isa " << cfg.isa << '\n';
  os << "opt " << cfg.opt << '\n';
  os << "vocab_size " << cfg.vocab_size << '\n';
  os << "enc_layers " << cfg.model.enc_layers << '\n';
  os << "dec_layers " << cfg.model.dec_layers << '\n';
  os << "d_model " << cfg.model.d_model << '\n';
  os << "heads " << cfg.model.heads << '\n';
  os << "ffn_dim " << cfg.model.ffn_dim << '\n';
  os << "max_positions " << cfg.model.max_positions << '\n';
  os << "batch_size " << cfg.train.batch_size << '\n';
  os << "learning_rate " << fmt_f64(cfg.train.learning_rate) << '\n';
  os << "warmup_steps " << cfg.train.warmup_steps << '\n';
  os << "max_steps " << cfg.train.max_steps << '\n';
  os << "train_seed " << cfg.train.seed << '\n';
  os << "beam_k " << cfg.beam.k << '\n';
  os << "max_decode_len " << cfg.beam.max_decode_len << '\n';
  os << "n_tests " << cfg.equiv.n_tests << '\n';
  os << "input_seed " << cfg.equiv.input_seed << '\n';
  os << "buffer_len " << cfg.equiv.buffer_len << '\n';
  os << "step_limit " << cfg.equiv.step_limit << '\n';
  os << "type_inference " << (cfg.type_inference ? 1 : 0) << '\n';
  os << "jobs " << cfg.jobs << '\n';
  os << "out_dir " << cfg.out_dir << '\n';
  return os.str();
}

std::string dataset_path(const ExperimentConfig& cfg) {
  return cfg.out_dir + "/dataset.jsonl";
}

std::string vocab_path(const ExperimentConfig& cfg) {
  return cfg.out_dir + "/vocab.txt";
}

std::string model_path(const ExperimentConfig& cfg) {
  return cfg.out_dir + "/model.ckpt";
}

std::string records_path(const ExperimentConfig& cfg, bool type_inference) {
  return cfg.out_dir + (type_inference ? "/records-ti1.csv"
                                       : "/records-ti0.csv");
}

std::string manifest_path(const ExperimentConfig& cfg) {
  return cfg.out_dir + "/manifest.txt";
}

}  // namespace declab::pipeline
