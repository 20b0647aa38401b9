#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "declab/common.hpp"
#include "declab/isa/text.hpp"
#include "declab/minic/features.hpp"
#include "declab/minic/parse.hpp"
#include "declab/pipeline/pipeline.hpp"
#include "declab/ti/ti.hpp"

namespace declab::pipeline {

namespace {

struct Slice {
  std::vector<DatasetEntry> train;
  std::vector<DatasetEntry> test;
};

Slice slice_dataset(const std::vector<DatasetEntry>& all,
                    const ExperimentConfig& cfg) {
  Slice s;
  for (const DatasetEntry& e : all) {
    if (e.isa != cfg.isa || e.opt != cfg.opt) continue;
    (e.split == "test" ? s.test : s.train).push_back(e);
  }
  return s;
}

std::vector<int> encode_ids(const tok::Vocab& vocab, const std::string& text) {
  std::vector<uint32_t> raw = tok::encode(vocab, text);
  return std::vector<int>(raw.begin(), raw.end());
}

std::string decode_ids(const tok::Vocab& vocab, const std::vector<int>& ids) {
  std::vector<uint32_t> raw(ids.begin(), ids.end());
  return tok::decode(vocab, raw);
}

std::string fmt_pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace

tok::Vocab run_train_tokenizer(const ExperimentConfig& cfg) {
  Slice s = slice_dataset(load_dataset(dataset_path(cfg)), cfg);
  if (s.train.empty())
    throw PipelineError("no train entries for " + cfg.isa + "/" + cfg.opt);
  std::vector<std::string> corpus;
  corpus.reserve(s.train.size() * 2);
  for (const DatasetEntry& e : s.train) {
    corpus.push_back(e.c_source);
    corpus.push_back(e.asm_text);
  }
  tok::Vocab vocab = tok::train_unigram(corpus, cfg.vocab_size);
  std::filesystem::create_directories(cfg.out_dir);
  tok::save_vocab(vocab, vocab_path(cfg));
  return vocab;
}

TrainSummary run_train(const ExperimentConfig& cfg) {
  Slice s = slice_dataset(load_dataset(dataset_path(cfg)), cfg);
  tok::Vocab vocab = tok::load_vocab(vocab_path(cfg));

  const int m = cfg.model.max_positions;
  std::vector<nn::TrainPair> pairs;
  TrainSummary summary;
  for (const DatasetEntry& e : s.train) {
    std::vector<int> src = encode_ids(vocab, e.asm_text);
    std::vector<int> tgt = encode_ids(vocab, e.c_source);
    // Decoder input is BOS + target, so the target needs one spare slot.
    if (static_cast<int>(src.size()) > m ||
        static_cast<int>(tgt.size()) + 1 > m) {
      ++summary.skipped_too_long;
      continue;
    }
    pairs.emplace_back(std::move(src), std::move(tgt));
  }
  if (pairs.empty())
    throw PipelineError("no training pairs fit within max_positions");
  summary.pairs = static_cast<int>(pairs.size());

  nn::ModelConfig mcfg = cfg.model;
  mcfg.vocab_size = static_cast<int>(vocab.total_ids());
  nn::ModelParams<float> params = nn::init_model<float>(mcfg, cfg.train.seed);
  nn::AdamState<float> adam = nn::make_adam_state(params);

  Rng shuffle_rng(cfg.train.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), size_t{0});
  size_t cursor = order.size();  // forces a shuffle before the first batch

  while (summary.steps < cfg.train.max_steps) {
    if (cursor >= order.size()) {
      for (size_t i = order.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(
            shuffle_rng.uniform_int(0, static_cast<int64_t>(i) - 1));
        std::swap(order[i - 1], order[j]);
      }
      cursor = 0;
    }
    std::vector<nn::TrainPair> batch;
    for (int b = 0; b < cfg.train.batch_size && cursor < order.size(); ++b)
      batch.push_back(pairs[order[cursor++]]);
    float loss = nn::train_step(params, batch, adam, cfg.train);
    if (summary.steps == 0) summary.first_loss = loss;
    summary.last_loss = loss;
    ++summary.steps;
  }

  nn::save_model(params, model_path(cfg));
  return summary;
}

namespace {

// Beam decode of one assembler text; "" when the source does not fit.
std::string decode_raw(const nn::ModelParams<float>& params,
                       const tok::Vocab& vocab, const std::string& asm_text,
                       const nn::BeamConfig& bcfg) {
  std::vector<int> src = encode_ids(vocab, asm_text);
  if (src.empty() ||
      static_cast<int>(src.size()) > params.cfg.max_positions)
    return "";
  std::vector<int> out =
      nn::beam_search(params, src, bcfg, static_cast<int>(tok::Vocab::kBos),
                      static_cast<int>(tok::Vocab::kEos));
  return decode_ids(vocab, out);
}

}  // namespace

std::string decompile_text(const nn::ModelParams<float>& params,
                           const tok::Vocab& vocab, const std::string& asm_text,
                           const nn::BeamConfig& bcfg, bool type_inference) {
  std::string hyp = decode_raw(params, vocab, asm_text, bcfg);
  if (type_inference) {
    ti::Completion comp = ti::complete_program(hyp);
    if (comp.status == ti::Completion::Status::Completed) return comp.source;
  }
  return hyp;
}

std::vector<metrics::EvalRecord> score_hypotheses(
    const ExperimentConfig& cfg, const std::vector<DatasetEntry>& test,
    const std::vector<std::string>& hypotheses, bool type_inference) {
  if (test.size() != hypotheses.size())
    throw PipelineError("hypothesis count does not match test entries");
  std::vector<metrics::EvalRecord> records(test.size());
  for (size_t i = 0; i < test.size(); ++i) {
    const DatasetEntry& e = test[i];
    const std::string& hyp = hypotheses[i];
    metrics::EvalRecord& r = records[i];
    r.id = e.id;
    r.isa = e.isa;
    r.opt = e.opt;

    minic::Ast truth = minic::parse_function(e.c_source);
    minic::FeatureVector fv = minic::extract_features(truth, e.asm_text);
    r.asm_length = fv.asm_length;
    r.c_length = fv.c_length;
    r.num_func_args = fv.num_func_args;
    r.num_pointers = fv.num_pointers;
    r.edit_similarity = metrics::edit_similarity(hyp, e.c_source);

    // Without type completion a hypothesis must already parse and
    // type-check on its own; the harness then judges it the same way.
    if (!type_inference) {
      try {
        minic::parse_function(hyp);
      } catch (const std::exception&) {
        continue;  // compiles = 0
      }
    }
    isa::AsmProgram original = isa::parse_asm(e.asm_text);
    equiv::Verdict v = equiv::io_equivalent(original, hyp, cfg.equiv);
    r.compiles = v.kind != equiv::Verdict::Kind::CompileError ? 1 : 0;
    r.io_pass = v.passed() ? 1 : 0;
  }
  return records;
}

EvalOutput run_eval(const ExperimentConfig& cfg) {
  Slice s = slice_dataset(load_dataset(dataset_path(cfg)), cfg);
  if (s.test.empty())
    throw PipelineError("no test entries for " + cfg.isa + "/" + cfg.opt);
  tok::Vocab vocab = tok::load_vocab(vocab_path(cfg));
  nn::ModelParams<float> params = nn::load_model(model_path(cfg));

  EvalOutput out;
  out.hypotheses.resize(s.test.size());
  out.categories.resize(s.test.size());

  // Results land at fixed indices, so output order is independent of the
  // worker count.
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= s.test.size()) break;
      out.hypotheses[i] = decode_raw(params, vocab, s.test[i].asm_text,
                                     cfg.beam);
      out.categories[i] =
          categorize(minic::parse_function(s.test[i].c_source));
    }
  };
  int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(jobs);
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }

  out.records = score_hypotheses(cfg, s.test, out.hypotheses,
                                 cfg.type_inference);

  std::string path = records_path(cfg, cfg.type_inference);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw PipelineError("cannot write '" + path + "'");
  os << metrics::eval_csv_header() << '\n';
  for (const metrics::EvalRecord& r : out.records)
    os << metrics::eval_csv_row(r) << '\n';
  return out;
}

SummaryRow summarize(const std::string& isa, const std::string& opt,
                     bool type_inference,
                     const std::vector<metrics::EvalRecord>& records) {
  SummaryRow row;
  row.isa = isa;
  row.opt = opt;
  row.type_inference = type_inference;
  row.n = records.size();
  if (records.empty()) return row;
  double compiles = 0, passes = 0, sim = 0;
  for (const metrics::EvalRecord& r : records) {
    compiles += r.compiles;
    passes += r.io_pass;
    sim += r.edit_similarity;
  }
  double n = static_cast<double>(records.size());
  row.compile_rate = 100.0 * compiles / n;
  row.io_accuracy = 100.0 * passes / n;
  row.mean_edit_similarity = 100.0 * sim / n;
  return row;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "isa,opt,type_inference,n,compile_rate,io_accuracy,"
        "mean_edit_similarity\n";
  for (const SummaryRow& r : rows)
    os << r.isa << ',' << r.opt << ',' << (r.type_inference ? 1 : 0) << ','
       << r.n << ',' << fmt_pct(r.compile_rate) << ',' << fmt_pct(r.io_accuracy)
       << ',' << fmt_pct(r.mean_edit_similarity) << '\n';
  return os.str();
}

std::vector<GroupRow> group_accuracy(
    const std::vector<metrics::EvalRecord>& records,
    const std::vector<std::string>& categories) {
  if (records.size() != categories.size())
    throw PipelineError("category count does not match records");
  std::map<std::string, std::pair<size_t, size_t>> by_cat;  // n, passes
  for (size_t i = 0; i < records.size(); ++i) {
    auto& [n, passes] = by_cat[categories[i]];
    ++n;
    passes += static_cast<size_t>(records[i].io_pass);
  }
  std::vector<GroupRow> rows;
  for (const auto& [cat, np] : by_cat) {
    GroupRow row;
    row.category = cat;
    row.n = np.first;
    row.io_accuracy =
        np.first ? 100.0 * static_cast<double>(np.second) / np.first : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::string groups_csv(const std::vector<GroupRow>& rows) {
  std::ostringstream os;
  os << "category,n,io_accuracy\n";
  for (const GroupRow& r : rows)
    os << r.category << ',' << r.n << ',' << fmt_pct(r.io_accuracy) << '\n';
  return os.str();
}

namespace {

std::vector<metrics::EvalRecord> parse_records_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw PipelineError("cannot open records '" + path + "'; run eval first");
  std::vector<metrics::EvalRecord> records;
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (header) {
      if (line != metrics::eval_csv_header())
        throw PipelineError("unexpected records header in '" + path + "'");
      header = false;
      continue;
    }
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 10)
      throw PipelineError("malformed records row: " + line);
    metrics::EvalRecord r;
    r.id = fields[0];
    r.isa = fields[1];
    r.opt = fields[2];
    r.compiles = std::stoi(fields[3]);
    r.io_pass = std::stoi(fields[4]);
    r.edit_similarity = std::stod(fields[5]);
    r.asm_length = static_cast<uint32_t>(std::stoul(fields[6]));
    r.c_length = static_cast<uint32_t>(std::stoul(fields[7]));
    r.num_func_args = static_cast<uint32_t>(std::stoul(fields[8]));
    r.num_pointers = static_cast<uint32_t>(std::stoul(fields[9]));
    records.push_back(std::move(r));
  }
  return records;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw PipelineError("cannot write '" + path + "'");
  os << text;
}

}  // namespace

void run_report(const ExperimentConfig& cfg) {
  std::vector<metrics::EvalRecord> records =
      parse_records_csv(records_path(cfg, cfg.type_inference));

  write_text(cfg.out_dir + "/correlation.csv",
             metrics::correlation_csv(metrics::correlation_table(records)));
  write_text(cfg.out_dir + "/buckets.csv",
             metrics::buckets_csv(metrics::bucket_accuracy(records, 5)));
  write_text(cfg.out_dir + "/summary.csv",
             summary_csv({summarize(cfg.isa, cfg.opt, cfg.type_inference,
                                    records)}));

  // Categories are recomputed from the stored sources rather than stored.
  std::map<std::string, std::string> category_by_id;
  for (const DatasetEntry& e : load_dataset(dataset_path(cfg))) {
    if (category_by_id.count(e.id)) continue;
    category_by_id[e.id] = categorize(minic::parse_function(e.c_source));
  }
  std::vector<std::string> categories;
  categories.reserve(records.size());
  for (const metrics::EvalRecord& r : records) {
    auto it = category_by_id.find(r.id);
    if (it == category_by_id.end())
      throw PipelineError("record id not in dataset: " + r.id);
    categories.push_back(it->second);
  }
  write_text(cfg.out_dir + "/groups.csv",
             groups_csv(group_accuracy(records, categories)));
}

int harness_ceiling_misses(const ExperimentConfig& cfg,
                           const std::vector<DatasetEntry>& entries) {
  int misses = 0;
  for (const DatasetEntry& e : entries) {
    isa::AsmProgram original = isa::parse_asm(e.asm_text);
    equiv::Verdict v = equiv::io_equivalent(original, e.c_source, cfg.equiv);
    if (!v.passed()) ++misses;
  }
  return misses;
}

}  // namespace declab::pipeline
