#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "declab/equiv/equiv.hpp"
#include "declab/metrics/metrics.hpp"
#include "declab/minic/ast.hpp"
#include "declab/nn/nn.hpp"
#include "declab/tok/tok.hpp"

namespace declab::pipeline {

struct GenerationBudgetExceeded : std::runtime_error {
  explicit GenerationBudgetExceeded(const std::string& m)
      : std::runtime_error(m) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct PipelineError : std::runtime_error {
  explicit PipelineError(const std::string& m) : std::runtime_error(m) {}
};

// ---------------------------------------------------------------------------
// Function generation
// ---------------------------------------------------------------------------

struct GenFunction {
  minic::Ast ast;
  std::string canonical;  // pretty_print(ast): prelude + function
  std::string category;   // loop | pointer | arith (loop wins ties)
};

// Grammar-directed random functions, biased short: geometric statement
// counts, expression depth <= 4, literal-bounded loops, pointer indices
// kept inside the default test-buffer length. Roughly one function in ten
// carries a typedef alias or an extern declaration. Every result
// type-checks, survives interpretation on the all-zero input without
// hitting the step limit, and is unique by canonical text.
std::vector<GenFunction> generate_functions(uint64_t seed, int n);

// Category of a parsed function: "loop" if it contains any loop, else
// "pointer" if it touches pointers, else "arith".
std::string categorize(const minic::Ast& ast);

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

struct DatasetEntry {
  std::string id;        // hex hash of the canonical C text
  std::string c_source;  // canonical text (prelude + function)
  std::string asm_text;
  std::string isa;    // REG | STK
  std::string opt;    // O0 | O2
  std::string split;  // train | test
};

std::string entry_to_json(const DatasetEntry& e);
DatasetEntry entry_from_json(const std::string& line);

void save_dataset(const std::vector<DatasetEntry>& entries,
                  const std::string& path);
std::vector<DatasetEntry> load_dataset(const std::string& path);

// Canonical C texts appearing in more than one split (must be zero).
int leakage_count(const std::vector<DatasetEntry>& entries);

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  uint64_t gen_seed = 1;
  int n_functions = 5000;
  std::string isa = "REG";
  std::string opt = "O0";
  size_t vocab_size = 1000;
  nn::ModelConfig model;   // vocab_size is filled in from the tokenizer
  nn::TrainConfig train;
  nn::BeamConfig beam;
  equiv::EquivConfig equiv;
  bool type_inference = true;
  int jobs = 1;
  std::string out_dir = "declab-out";
};

// Desk-scale defaults (5k functions, vocab 1000, 2+2 layers at d=128,
// batch 32 for 20k steps).
ExperimentConfig default_config();

// "key value" lines; '#' starts a comment. Unknown keys are ConfigError.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
void set_config_key(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);
std::string config_to_text(const ExperimentConfig& cfg);

isa::IsaId isa_from_name(const std::string& name);
isa::OptLevel opt_from_name(const std::string& name);

// Artifact locations inside cfg.out_dir.
std::string dataset_path(const ExperimentConfig& cfg);
std::string vocab_path(const ExperimentConfig& cfg);
std::string model_path(const ExperimentConfig& cfg);
std::string records_path(const ExperimentConfig& cfg, bool type_inference);
std::string manifest_path(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Experiment stages
// ---------------------------------------------------------------------------

// Generates cfg.n_functions functions and writes one dataset entry per
// (isa, opt) combination for each, split 95/5 by function identity.
std::vector<DatasetEntry> build_dataset(const ExperimentConfig& cfg);
void run_gen_data(const ExperimentConfig& cfg);

// Trains the subword vocabulary on the train-split C and assembler texts
// of the configured (isa, opt) slice.
tok::Vocab run_train_tokenizer(const ExperimentConfig& cfg);

struct TrainSummary {
  int steps = 0;
  int pairs = 0;
  int skipped_too_long = 0;
  float first_loss = 0.0f;
  float last_loss = 0.0f;
};

// Teacher-forced training on the train split; saves the checkpoint.
TrainSummary run_train(const ExperimentConfig& cfg);

// Decodes one assembler text with the trained model; applies type
// completion when enabled. Returns the C hypothesis text.
std::string decompile_text(const nn::ModelParams<float>& params,
                           const tok::Vocab& vocab, const std::string& asm_text,
                           const nn::BeamConfig& bcfg, bool type_inference);

struct EvalOutput {
  std::vector<metrics::EvalRecord> records;
  std::vector<std::string> hypotheses;  // raw decoded text per record
  std::vector<std::string> categories;  // generator-style tag per record
};

// Beam-decodes every test entry of the configured slice and scores it;
// order matches the dataset regardless of cfg.jobs. Writes the records CSV.
EvalOutput run_eval(const ExperimentConfig& cfg);

// Scores pre-computed hypotheses against test entries (the ablation path:
// the same decodes under a different completion policy).
std::vector<metrics::EvalRecord> score_hypotheses(
    const ExperimentConfig& cfg, const std::vector<DatasetEntry>& test,
    const std::vector<std::string>& hypotheses, bool type_inference);

struct SummaryRow {
  std::string isa;
  std::string opt;
  bool type_inference = false;
  size_t n = 0;
  double compile_rate = 0.0;    // percent
  double io_accuracy = 0.0;     // percent
  double mean_edit_similarity = 0.0;
};

SummaryRow summarize(const std::string& isa, const std::string& opt,
                     bool type_inference,
                     const std::vector<metrics::EvalRecord>& records);
std::string summary_csv(const std::vector<SummaryRow>& rows);

struct GroupRow {
  std::string category;
  size_t n = 0;
  double io_accuracy = 0.0;  // percent
};
std::vector<GroupRow> group_accuracy(
    const std::vector<metrics::EvalRecord>& records,
    const std::vector<std::string>& categories);
std::string groups_csv(const std::vector<GroupRow>& rows);

// records.csv -> correlation.csv, buckets.csv, summary.csv (and groups.csv
// when categories are known).
void run_report(const ExperimentConfig& cfg);

// Feeds every pretty-printed ground-truth test entry through completion and
// the IO harness; returns the number that fail (must be zero).
int harness_ceiling_misses(const ExperimentConfig& cfg,
                           const std::vector<DatasetEntry>& entries);

}  // namespace declab::pipeline
