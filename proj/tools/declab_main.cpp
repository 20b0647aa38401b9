#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "declab/pipeline/pipeline.hpp"

using namespace declab;

namespace {

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream os;
    os << std::cin.rdbuf();
    return os.str();
  }
  std::ifstream is(path, std::ios::binary);
  if (!is) throw pipeline::PipelineError("cannot open '" + path + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"declab: neural decompilation laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 0;
  int jobs = 0;
  app.add_option("--config", config_path, "key-value config file");
  CLI::Option* seed_opt = app.add_option(
      "--seed", seed, "override the generator, training, and input seeds");
  CLI::Option* jobs_opt =
      app.add_option("--jobs", jobs, "evaluation worker threads")
          ->check(CLI::PositiveNumber);

  CLI::App* cmd_gen = app.add_subcommand(
      "gen-data", "generate the paired C/assembler dataset");
  CLI::App* cmd_tok = app.add_subcommand(
      "train-tokenizer", "learn the subword vocabulary from the train split");
  CLI::App* cmd_train =
      app.add_subcommand("train", "train the decompilation model");
  CLI::App* cmd_dec =
      app.add_subcommand("decompile", "decode one assembler file to C");
  std::string asm_path;
  cmd_dec->add_option("asm-file", asm_path, "assembler text ('-' for stdin)")
      ->required();
  CLI::App* cmd_eval =
      app.add_subcommand("eval", "decode and score the test split");
  CLI::App* cmd_report =
      app.add_subcommand("report", "derive report tables from eval records");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    pipeline::ExperimentConfig cfg = config_path.empty()
                                         ? pipeline::default_config()
                                         : pipeline::load_config(config_path);
    if (*seed_opt) {
      cfg.gen_seed = seed;
      cfg.train.seed = seed;
      cfg.equiv.input_seed = seed;
    }
    if (*jobs_opt) cfg.jobs = jobs;

    if (*cmd_gen) {
      pipeline::run_gen_data(cfg);
      auto entries = pipeline::load_dataset(pipeline::dataset_path(cfg));
      std::cout << "wrote " << entries.size() << " entries to "
                << pipeline::dataset_path(cfg) << "\n";
    } else if (*cmd_tok) {
      tok::Vocab v = pipeline::run_train_tokenizer(cfg);
      std::cout << "wrote " << v.size() << " pieces (" << v.total_ids()
                << " ids) to " << pipeline::vocab_path(cfg) << "\n";
    } else if (*cmd_train) {
      pipeline::TrainSummary ts = pipeline::run_train(cfg);
      std::cout << "trained " << ts.steps << " steps on " << ts.pairs
                << " pairs (" << ts.skipped_too_long
                << " skipped as too long), loss " << ts.first_loss << " -> "
                << ts.last_loss << "\n"
                << "wrote " << pipeline::model_path(cfg) << "\n";
    } else if (*cmd_dec) {
      std::string asm_text = read_input(asm_path);
      tok::Vocab vocab = tok::load_vocab(pipeline::vocab_path(cfg));
      nn::ModelParams<float> params =
          nn::load_model(pipeline::model_path(cfg));
      std::cout << pipeline::decompile_text(params, vocab, asm_text, cfg.beam,
                                            cfg.type_inference);
    } else if (*cmd_eval) {
      pipeline::EvalOutput out = pipeline::run_eval(cfg);
      pipeline::SummaryRow row = pipeline::summarize(
          cfg.isa, cfg.opt, cfg.type_inference, out.records);
      std::cout << "scored " << row.n << " test entries for " << cfg.isa << "/"
                << cfg.opt << " (type inference "
                << (cfg.type_inference ? "on" : "off") << ")\n"
                << "compile rate " << row.compile_rate << "%, io accuracy "
                << row.io_accuracy << "%, mean edit similarity "
                << row.mean_edit_similarity << "%\n"
                << "wrote "
                << pipeline::records_path(cfg, cfg.type_inference) << "\n";
    } else if (*cmd_report) {
      pipeline::run_report(cfg);
      std::cout << "wrote " << cfg.out_dir << "/{summary,correlation,buckets,"
                << "groups}.csv\n";
    }
  } catch (const pipeline::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
