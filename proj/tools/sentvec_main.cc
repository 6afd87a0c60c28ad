// sentvec: sentence-embedding evaluation from word vectors.
//
//   sentvec eval     --config run.json [--out DIR] [--format csv,json,md,svg]
//                    [--seed N] [--workers N]
//   sentvec sweep    --config run.json --dims 100,300,500,800 [...]
//   sentvec embed    --config run.json --task NAME --method NAME [--out FILE]
//   sentvec embed    --vectors FILE --input FILE [--strategy mean|sif|mean_max]
//                    [--frequencies FILE] [--sif-a A] [--out FILE]
//   sentvec validate --config run.json [--dims ...]
//
// Exit status: 0 success, 1 invalid input or configuration, 2 runtime failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sentvec/config.h"
#include "sentvec/render.h"
#include "sentvec/runner.h"

namespace {

using namespace sentvec;

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Overrides {
  std::string out;
  std::string formats;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
};

RunConfig load_config(const std::string& path, const Overrides& o) {
  RunConfig cfg = load_run_config(path);
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.formats.empty()) cfg.formats = parse_formats(o.formats);
  if (o.seed) cfg.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  cfg.validate();
  return cfg;
}

// Runs `check` (exit 1 on failure), then `run` (exit 2 on failure).
template <typename Check, typename Run>
int guarded(Check&& check, Run&& run) {
  try {
    check();
  } catch (const std::exception& e) {
    std::cerr << "sentvec: " << e.what() << '\n';
    return kExitValidation;
  }
  try {
    run();
  } catch (const std::exception& e) {
    std::cerr << "sentvec: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}

void add_overrides(CLI::App* cmd, Overrides* o) {
  cmd->add_option("--out", o->out, "Output directory (overrides output.dir)");
  cmd->add_option("--format", o->formats, "Comma-separated formats: csv,json,md,svg");
  cmd->add_option("--seed", o->seed, "Run seed (overrides seed)");
  cmd->add_option("--workers", o->workers, "Parallel cells (overrides workers)")
      ->check(CLI::PositiveNumber);
}

int write_table(const SentenceVectorTable& table, const std::string& out_path) {
  if (out_path.empty()) {
    write_sentence_vector_table(std::cout, table);
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  write_sentence_vector_table(out, table);
  return 0;
}

SentenceVectorTable to_table(const Matrix& m, const std::vector<std::string>& ids) {
  SentenceVectorTable table(m.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) table.insert(ids[i], m.row(i));
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentence representations from word vectors: build, probe, report."};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  std::string dims_text;

  auto* eval = app.add_subcommand("eval", "Evaluate every method on every task");
  eval->add_option("--config", config_path, "Run configuration (JSON)")->required();
  add_overrides(eval, &overrides);

  auto* sweep = app.add_subcommand("sweep", "Evaluate across vector dimensionalities");
  sweep->add_option("--config", config_path, "Run configuration (JSON)")->required();
  sweep->add_option("--dims", dims_text, "Comma-separated dimensions")->required();
  add_overrides(sweep, &overrides);

  auto* validate = app.add_subcommand("validate", "Check a configuration and its files");
  validate->add_option("--config", config_path, "Run configuration (JSON)")->required();
  validate->add_option("--dims", dims_text, "Also check per-dimension lexicons");

  std::string task_name, method_name, vectors_path, input_path, freq_path, out_path;
  std::string strategy_name = "mean";
  double sif_a = kDefaultSifA;
  bool no_normalize = false, no_lowercase = false;
  auto* embed = app.add_subcommand("embed", "Export sentence vectors as TSV");
  embed->add_option("--config", config_path, "Run configuration (JSON)");
  embed->add_option("--task", task_name, "Task name from the configuration");
  embed->add_option("--method", method_name, "Method name from the configuration");
  embed->add_option("--vectors", vectors_path, "Word vector file");
  embed->add_option("--input", input_path, "Sentences, one per line");
  embed->add_option("--strategy", strategy_name, "mean | sif | mean_max")
      ->check(CLI::IsMember({"mean", "sif", "mean_max"}));
  embed->add_option("--frequencies", freq_path, "Word frequency file for sif");
  embed->add_option("--sif-a", sif_a, "SIF smoothing parameter")->check(CLI::PositiveNumber);
  embed->add_flag("--no-normalize", no_normalize, "Keep raw word vector lengths");
  embed->add_flag("--no-lowercase", no_lowercase, "Keep case when tokenizing");
  embed->add_option("--out", out_path, "Output TSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitValidation;
  }

  if (*eval) {
    RunConfig cfg;
    return guarded([&] { cfg = load_config(config_path, overrides); validate_run(cfg); },
                   [&] {
                     const RunOutput out = run_matrix(cfg);
                     write_run_outputs(cfg, out);
                     std::cout << render_markdown(out.matrix);
                   });
  }

  if (*sweep) {
    RunConfig cfg;
    std::vector<std::size_t> dims;
    return guarded(
        [&] {
          cfg = load_config(config_path, overrides);
          dims = parse_dims(dims_text);
          validate_run(cfg, dims);
        },
        [&] {
          const SweepResult s = dim_sweep(cfg, dims);
          write_sweep_outputs(cfg, s);
          std::cout << render_sweep_csv(s);
        });
  }

  if (*validate) {
    return guarded(
        [&] {
          const RunConfig cfg = load_config(config_path, {});
          validate_run(cfg, dims_text.empty() ? std::vector<std::size_t>{}
                                              : parse_dims(dims_text));
        },
        [] { std::cout << "ok\n"; });
  }

  // embed
  if (!config_path.empty()) {
    RunConfig cfg;
    const TaskSpec* task_spec = nullptr;
    const MethodSpec* method = nullptr;
    return guarded(
        [&] {
          cfg = load_config(config_path, {});
          for (const auto& t : cfg.tasks)
            if (t.name == task_name) task_spec = &t;
          for (const auto& m : cfg.methods)
            if (m.name == method_name) method = &m;
          if (!task_spec) throw ConfigError("no task named '" + task_name + "'");
          if (!method) throw ConfigError("no method named '" + method_name + "'");
          if (!method->lexicon)
            throw ConfigError("method '" + method_name + "' has no word lexicon to embed with");
        },
        [&] {
          const LoadedTask task = load_task(*task_spec, cfg);
          ResourceCache cache;
          const ResolvedMethod r = resolve_method(*method, task, cfg, cache);
          const Matrix m = embed_task(task, r, cfg.normalize, cfg.workers);
          write_table(to_table(m, task.sentence_ids()), out_path);
        });
  }

  std::optional<WordVectorTable> table;
  std::vector<Sentence> sentences;
  AggregationStrategy strategy;
  return guarded(
      [&] {
        if (vectors_path.empty() || input_path.empty())
          throw ConfigError("embed needs --config/--task/--method or --vectors/--input");
        table = load_word_vectors_file(vectors_path);
        std::ifstream in(input_path);
        if (!in) throw ConfigError("cannot open '" + input_path + "'");
        TokenizerOptions tok;
        tok.lowercase = !no_lowercase;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
          ++line_no;
          try {
            sentences.push_back(tokenize(chomp(line), tok));
          } catch (const ParseError& e) {
            throw ParseError(line_no, input_path + ": " + e.detail());
          }
        }
        if (strategy_name == "sif") {
          if (freq_path.empty()) throw ConfigError("--strategy sif needs --frequencies");
          SifStrategy sif;
          sif.a = sif_a;
          sif.freq = std::make_shared<const FrequencyTable>(load_frequency_table_file(freq_path));
          strategy = std::move(sif);
        } else if (strategy_name == "mean_max") {
          strategy = MeanMaxStrategy{};
        }
      },
      [&] {
        std::vector<std::size_t> all(sentences.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        EmbedOptions options;
        options.normalize = !no_normalize;
        const Matrix m = embed_corpus(sentences, *table, strategy, all, options);
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < sentences.size(); ++i) ids.push_back(std::to_string(i + 1));
        write_table(to_table(m, ids), out_path);
      });
}
