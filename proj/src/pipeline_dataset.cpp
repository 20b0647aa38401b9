#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "declab/common.hpp"
#include "declab/isa/compile.hpp"
#include "declab/isa/text.hpp"
#include "declab/minic/print.hpp"
#include "declab/pipeline/pipeline.hpp"

namespace declab::pipeline {

std::string entry_to_json(const DatasetEntry& e) {
  nlohmann::json j;
  j["id"] = e.id;
  j["c_source"] = e.c_source;
  j["asm_text"] = e.asm_text;
  j["isa"] = e.isa;
  j["opt"] = e.opt;
  j["split"] = e.split;
  return j.dump();
}

DatasetEntry entry_from_json(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw PipelineError("malformed dataset line: " + line.substr(0, 60));
  DatasetEntry e;
  try {
    e.id = j.at("id").get<std::string>();
    e.c_source = j.at("c_source").get<std::string>();
    e.asm_text = j.at("asm_text").get<std::string>();
    e.isa = j.at("isa").get<std::string>();
    e.opt = j.at("opt").get<std::string>();
    e.split = j.at("split").get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    throw PipelineError(std::string("dataset line missing field: ") +
                        ex.what());
  }
  return e;
}

void save_dataset(const std::vector<DatasetEntry>& entries,
                  const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw PipelineError("cannot write '" + path + "'");
  for (const DatasetEntry& e : entries) os << entry_to_json(e) << '\n';
  if (!os) throw PipelineError("write failed for '" + path + "'");
}

std::vector<DatasetEntry> load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw PipelineError("cannot open dataset '" + path +
                        "'; run gen-data first");
  std::vector<DatasetEntry> entries;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    entries.push_back(entry_from_json(line));
  }
  return entries;
}

int leakage_count(const std::vector<DatasetEntry>& entries) {
  std::map<std::string, std::set<std::string>> splits_by_source;
  for (const DatasetEntry& e : entries)
    splits_by_source[e.c_source].insert(e.split);
  int leaks = 0;
  for (const auto& [src, splits] : splits_by_source)
    if (splits.size() > 1) ++leaks;
  return leaks;
}

std::vector<DatasetEntry> build_dataset(const ExperimentConfig& cfg) {
  std::vector<GenFunction> funcs =
      generate_functions(cfg.gen_seed, cfg.n_functions);
  const std::pair<isa::IsaId, const char*> isas[] = {
      {isa::IsaId::REG, "REG"}, {isa::IsaId::STK, "STK"}};
  const std::pair<isa::OptLevel, const char*> opts[] = {
      {isa::OptLevel::O0, "O0"}, {isa::OptLevel::O2, "O2"}};
  std::vector<DatasetEntry> entries;
  entries.reserve(funcs.size() * 4);
  for (size_t i = 0; i < funcs.size(); ++i) {
    const GenFunction& f = funcs[i];
    // 95/5 split by function identity: every 20th function is test, and
    // all four (isa, opt) variants of a function share its split
    std::string split = (i % 20 == 19) ? "test" : "train";
    std::string id = to_hex(fnv1a64(f.canonical));
    for (const auto& [isa_id, isa_name] : isas)
      for (const auto& [opt_level, opt_name] : opts) {
        DatasetEntry e;
        e.id = id;
        e.c_source = f.canonical;
        e.asm_text = isa::emit_asm(isa::compile(f.ast, isa_id, opt_level));
        e.isa = isa_name;
        e.opt = opt_name;
        e.split = split;
        entries.push_back(std::move(e));
      }
  }
  return entries;
}

void run_gen_data(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  std::vector<DatasetEntry> entries = build_dataset(cfg);
  int leaks = leakage_count(entries);
  if (leaks > 0)
    throw PipelineError("train/test leakage: " + std::to_string(leaks) +
                        " sources appear in both splits");
  save_dataset(entries, dataset_path(cfg));
  std::ofstream manifest(manifest_path(cfg), std::ios::binary);
  manifest << config_to_text(cfg);
}

}  // namespace declab::pipeline
