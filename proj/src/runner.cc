#include "sentvec/runner.h"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "parallel.h"
#include "sentvec/render.h"

namespace sentvec {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return in;
}

template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
}

std::string lexicon_path(const LexiconSpec& lex, std::optional<std::size_t> dim) {
  if (lex.path.find("{dim}") == std::string::npos) return lex.path;
  if (!dim) throw ConfigError("lexicon path '" + lex.path + "' needs a dimension");
  return substitute(lex.path, "dim", std::to_string(*dim));
}

std::optional<std::size_t> lexicon_dim(const LexiconSpec& lex,
                                       std::optional<std::size_t> dim_override) {
  return dim_override ? dim_override : lex.dim;
}

std::string sentence_vector_path(const MethodSpec& m, const LoadedTask& task) {
  return substitute(m.sentence_vectors, "task", file_stem(task.spec.name));
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

bool wants(const RunConfig& cfg, OutputFormat f) {
  for (auto g : cfg.formats)
    if (g == f) return true;
  return false;
}

void write_matrix_files(const RunConfig& cfg, const ResultMatrix& m, const fs::path& dir,
                        bool svg) {
  fs::create_directories(dir);
  if (wants(cfg, OutputFormat::kCsv)) write_file(dir / "results.csv", render_csv(m));
  if (wants(cfg, OutputFormat::kJson)) write_file(dir / "results.json", render_json(m));
  if (wants(cfg, OutputFormat::kMarkdown)) write_file(dir / "results.md", render_markdown(m));
  if (svg && wants(cfg, OutputFormat::kSvg))
    for (std::size_t t = 0; t < m.tasks.size(); ++t)
      write_file(dir / (file_stem(m.tasks[t]) + ".svg"), render_bar_svg(m, t));
}

}  // namespace

std::size_t LoadedTask::size() const {
  return classification ? classification->items.size() : pairs->items.size();
}

const Splits& LoadedTask::splits() const {
  return classification ? classification->splits : pairs->splits;
}

std::vector<Sentence> LoadedTask::sentences() const {
  std::vector<Sentence> out;
  if (classification) {
    for (const auto& item : classification->items) out.push_back(item.tokens);
  } else {
    for (const auto& item : pairs->items) {
      out.push_back(item.tokens_a);
      out.push_back(item.tokens_b);
    }
  }
  return out;
}

std::vector<std::string> LoadedTask::sentence_ids() const {
  std::vector<std::string> out;
  if (classification) {
    for (std::size_t i = 0; i < classification->items.size(); ++i)
      out.push_back(std::to_string(i + 1));
  } else {
    for (const auto& item : pairs->items) {
      out.push_back(item.id + ":A");
      out.push_back(item.id + ":B");
    }
  }
  return out;
}

std::vector<std::string> LoadedTask::vocabulary() const {
  std::set<std::string> vocab;
  for (const auto& s : sentences()) vocab.insert(s.begin(), s.end());
  return {vocab.begin(), vocab.end()};
}

LoadedTask load_task(const TaskSpec& spec, const RunConfig& cfg,
                     std::optional<std::size_t> dim_override) {
  LoadedTask t;
  t.spec = spec;
  const std::uint64_t seed = spec.seed.value_or(cfg.seed);
  const std::size_t dim = dim_override.value_or(spec.dim);
  switch (spec.kind) {
    case TaskKind::kClassification: {
      auto in = open_input(spec.path);
      t.classification = with_path(spec.path, [&] {
        return load_classification_tsv(in, spec.labels, cfg.tokenizer);
      });
      break;
    }
    case TaskKind::kSickEntailment:
    case TaskKind::kSickRelatedness: {
      auto in = open_input(spec.path);
      t.pairs = with_path(spec.path, [&] { return load_sick_tsv(in, cfg.tokenizer); });
      break;
    }
    case TaskKind::kSyntheticClassification: {
      auto [task, table] =
          synthetic_classification(spec.classes, spec.items, spec.vocab_per_class, seed, dim);
      t.classification = std::move(task);
      t.builtin_lexicon = std::make_shared<const WordVectorTable>(std::move(table));
      break;
    }
    case TaskKind::kSyntheticRelatedness:
    case TaskKind::kSyntheticEntailment: {
      auto [task, table] = synthetic_relatedness(spec.items, dim, seed);
      t.pairs = std::move(task);
      t.builtin_lexicon = std::make_shared<const WordVectorTable>(std::move(table));
      break;
    }
  }
  if (t.classification) t.classification->name = spec.name;
  if (t.pairs) t.pairs->name = spec.name;

  t.split_seed = spec.split_seed.value_or(cfg.seed);
  if (t.splits().assigned()) {
    t.splits_from_file = true;
  } else if (t.classification) {
    t.classification->splits = make_splits(t.size(), cfg.split, t.split_seed);
  } else {
    t.pairs->splits = make_splits(t.size(), cfg.split, t.split_seed);
  }
  return t;
}

std::shared_ptr<const WordVectorTable> ResourceCache::word_vectors(
    const std::string& path, std::optional<std::size_t> dim) {
  auto it = words_.find(path);
  if (it == words_.end()) {
    if (!fs::exists(path)) throw ConfigError("word vector file '" + path + "' not found");
    it = words_.emplace(path, std::make_shared<const WordVectorTable>(
                                  load_word_vectors_file(path, dim))).first;
  }
  if (dim && it->second->dim() != *dim)
    throw ValidationError("'" + path + "' has dimension " +
                          std::to_string(it->second->dim()) + ", expected " +
                          std::to_string(*dim));
  return it->second;
}

std::shared_ptr<const FrequencyTable> ResourceCache::frequencies(const std::string& path) {
  auto it = freqs_.find(path);
  if (it == freqs_.end()) {
    if (!fs::exists(path)) throw ConfigError("frequency file '" + path + "' not found");
    it = freqs_.emplace(path, std::make_shared<const FrequencyTable>(
                                  load_frequency_table_file(path))).first;
  }
  return it->second;
}

std::shared_ptr<const SentenceVectorTable> ResourceCache::sentence_vectors(
    const std::string& path) {
  auto it = sentences_.find(path);
  if (it == sentences_.end()) {
    if (!fs::exists(path)) throw ConfigError("sentence vector file '" + path + "' not found");
    it = sentences_.emplace(path, std::make_shared<const SentenceVectorTable>(
                                      load_sentence_vector_table_file(path))).first;
  }
  return it->second;
}

ResolvedMethod resolve_method(const MethodSpec& method, const LoadedTask& task,
                              const RunConfig& cfg, ResourceCache& cache,
                              std::optional<std::size_t> dim_override) {
  ResolvedMethod r;
  r.name = method.name;
  if (!method.lexicon) {
    if (dim_override)
      throw ConfigError("method '" + method.name +
                        "' reads sentence vectors and cannot be swept over dimensions");
    r.sentence_vectors = cache.sentence_vectors(sentence_vector_path(method, task));
    return r;
  }

  const LexiconSpec& lex = *method.lexicon;
  switch (lex.kind) {
    case LexiconSpec::Kind::kTask:
      if (!task.builtin_lexicon)
        throw ConfigError("method '" + method.name + "': task '" + task.spec.name +
                          "' has no built-in lexicon");
      r.lexicon = task.builtin_lexicon;
      break;
    case LexiconSpec::Kind::kRandom: {
      const auto vocab = task.vocabulary();
      r.lexicon = std::make_shared<const WordVectorTable>(
          random_table(vocab, *lexicon_dim(lex, dim_override), lex.seed.value_or(cfg.seed)));
      break;
    }
    case LexiconSpec::Kind::kFile: {
      const auto dim = lexicon_dim(lex, dim_override);
      r.lexicon = cache.word_vectors(lexicon_path(lex, dim), dim);
      break;
    }
  }

  switch (method.strategy.kind) {
    case StrategySpec::Kind::kMean:
      r.strategy = MeanStrategy{};
      break;
    case StrategySpec::Kind::kMeanMax:
      r.strategy = MeanMaxStrategy{};
      break;
    case StrategySpec::Kind::kSif: {
      SifStrategy sif;
      sif.a = method.strategy.a;
      if (!method.strategy.frequencies.empty()) {
        sif.freq = cache.frequencies(method.strategy.frequencies);
      } else {
        auto ft = std::make_shared<FrequencyTable>();
        for (const auto& s : task.sentences())
          for (const auto& w : s) {
            ++ft->counts[w];
            ++ft->total;
          }
        if (ft->total == 0) throw ValidationError("task '" + task.spec.name + "' has no tokens");
        sif.freq = std::move(ft);
      }
      r.strategy = std::move(sif);
      break;
    }
  }
  return r;
}

Matrix embed_task(const LoadedTask& task, const ResolvedMethod& method, bool normalize,
                  unsigned workers) {
  const auto ids = task.sentence_ids();
  if (method.sentence_vectors) {
    const auto& sv = *method.sentence_vectors;
    Matrix m(ids.size(), sv.dim());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto v = sv.lookup(ids[i]);
      if (v.empty()) throw ValidationError("no sentence vector for id '" + ids[i] + "'");
      std::copy(v.begin(), v.end(), m.row(i).begin());
    }
    return m;
  }
  std::vector<std::size_t> fit_rows;
  for (std::size_t i : task.splits().train) {
    if (task.classification) {
      fit_rows.push_back(i);
    } else {
      fit_rows.push_back(2 * i);
      fit_rows.push_back(2 * i + 1);
    }
  }
  EmbedOptions options;
  options.normalize = normalize;
  options.workers = workers;
  return embed_corpus(task.sentences(), *method.lexicon, method.strategy, fit_rows, options);
}

EvalResult run_task(const LoadedTask& task, const ResolvedMethod& method,
                    const ProbeConfig& probe_cfg, bool normalize) {
  const Splits& splits = task.splits();
  if (splits.train.empty()) throw ValidationError("empty train split");
  if (splits.test.empty()) throw ValidationError("empty test split");

  const Matrix sentences = embed_task(task, method, normalize);
  auto features = [&](std::size_t item) -> Vector {
    if (task.classification) {
      auto r = sentences.row(item);
      return {r.begin(), r.end()};
    }
    return pair_features(sentences.row(2 * item), sentences.row(2 * item + 1));
  };
  const std::size_t width = task.classification ? sentences.cols() : 2 * sentences.cols();
  Matrix x(splits.train.size(), width);
  for (std::size_t k = 0; k < splits.train.size(); ++k) {
    const Vector f = features(splits.train[k]);
    std::copy(f.begin(), f.end(), x.row(k).begin());
  }

  EvalResult result;
  result.task_name = task.spec.name;
  result.method_name = method.name;
  result.measure = task.measure();
  result.n = splits.test.size();

  if (result.measure == Measure::kPearson) {
    std::vector<double> scores;
    for (std::size_t i : splits.train) scores.push_back(task.pairs->items[i].relatedness);
    const Probe probe = train_relatedness(x, scores, kRelatednessBins, probe_cfg);
    std::vector<double> predicted, gold;
    for (std::size_t i : splits.test) {
      predicted.push_back(predict_score(probe, features(i)));
      gold.push_back(task.pairs->items[i].relatedness);
    }
    result.value = pearson(gold, predicted);
  } else {
    auto label_of = [&](std::size_t i) -> std::size_t {
      return task.classification ? task.classification->items[i].label
                                 : static_cast<std::size_t>(task.pairs->items[i].entailment);
    };
    const std::size_t k =
        task.classification ? task.classification->labels.size() : kEntailmentClasses;
    std::vector<std::size_t> labels;
    for (std::size_t i : splits.train) labels.push_back(label_of(i));
    const Probe probe = train_classifier(x, labels, k, probe_cfg);
    std::vector<std::size_t> predicted, gold;
    for (std::size_t i : splits.test) {
      predicted.push_back(predict_class(probe, features(i)));
      gold.push_back(label_of(i));
    }
    result.value = accuracy<std::size_t>(predicted, gold);
  }
  result.validate();
  return result;
}

RunOutput run_matrix(const RunConfig& cfg, std::optional<std::size_t> dim_override) {
  cfg.validate();
  RunOutput out;
  for (const auto& spec : cfg.tasks) out.tasks.push_back(load_task(spec, cfg, dim_override));

  ResultMatrix& m = out.matrix;
  for (const auto& method : cfg.methods) m.methods.push_back(method.name);
  for (const auto& t : out.tasks) {
    m.tasks.push_back(t.spec.name);
    m.measures.push_back(t.measure());
  }

  // Resolution loads files, so it stays on this thread.
  ResourceCache cache;
  std::vector<ResolvedMethod> resolved;
  for (const auto& method : cfg.methods)
    for (const auto& task : out.tasks)
      resolved.push_back(resolve_method(method, task, cfg, cache, dim_override));

  const ProbeConfig probe = cfg.effective_probe();
  const std::size_t n_tasks = out.tasks.size();
  m.cells.resize(resolved.size());
  internal::parallel_for(resolved.size(), cfg.workers, [&](std::size_t c) {
    const LoadedTask& task = out.tasks[c % n_tasks];
    try {
      m.cells[c] = run_task(task, resolved[c], probe, cfg.normalize);
    } catch (const std::exception& e) {
      throw CellError(resolved[c].name, task.spec.name, e.what());
    }
  });
  return out;
}

SweepResult dim_sweep(const RunConfig& cfg, const std::vector<std::size_t>& dims) {
  if (dims.empty()) throw ConfigError("a sweep needs at least one dimension");
  validate_run(cfg, dims);
  SweepResult s;
  s.dims = dims;
  for (std::size_t d : dims) {
    RunOutput out = run_matrix(cfg, d);
    if (s.tasks.empty()) s.tasks = std::move(out.tasks);
    s.matrices.push_back(std::move(out.matrix));
  }
  return s;
}

void validate_run(const RunConfig& cfg, const std::vector<std::size_t>& dims) {
  cfg.validate();
  for (std::size_t d : dims)
    if (d == 0) throw ConfigError("dimensions must be positive");
  std::set<std::size_t> seen;
  for (std::size_t d : dims)
    if (!seen.insert(d).second)
      throw ConfigError("dimension " + std::to_string(d) + " listed twice");

  std::vector<LoadedTask> tasks;
  for (const auto& spec : cfg.tasks) tasks.push_back(load_task(spec, cfg));
  auto require_file = [](const std::string& path, const std::string& what) {
    if (!fs::is_regular_file(path)) throw ConfigError(what + " '" + path + "' not found");
  };

  for (const auto& m : cfg.methods) {
    if (!m.lexicon) {
      if (!dims.empty())
        throw ConfigError("method '" + m.name +
                          "' reads sentence vectors and cannot be swept over dimensions");
      for (const auto& t : tasks)
        require_file(sentence_vector_path(m, t), "sentence vector file for method '" + m.name + "'");
      continue;
    }
    const LexiconSpec& lex = *m.lexicon;
    if (lex.kind == LexiconSpec::Kind::kTask) {
      for (const auto& t : tasks)
        if (!t.builtin_lexicon)
          throw ConfigError("method '" + m.name + "': task '" + t.spec.name +
                            "' has no built-in lexicon");
    }
    if (lex.kind == LexiconSpec::Kind::kFile) {
      if (dims.empty()) {
        require_file(lexicon_path(lex, lex.dim), "word vector file for method '" + m.name + "'");
      } else {
        if (lex.path.find("{dim}") == std::string::npos)
          throw ConfigError("method '" + m.name + "': lexicon path '" + lex.path +
                            "' has no {dim} placeholder");
        for (std::size_t d : dims) {
          const std::string p = lexicon_path(lex, d);
          if (!fs::is_regular_file(p))
            throw ConfigError("no lexicon for dim " + std::to_string(d) + " (method '" +
                              m.name + "'): '" + p + "' not found");
        }
      }
    }
    if (m.strategy.kind == StrategySpec::Kind::kSif && !m.strategy.frequencies.empty())
      require_file(m.strategy.frequencies, "frequency file for method '" + m.name + "'");
  }
}

std::string run_metadata_json(const RunConfig& cfg, const std::vector<LoadedTask>& tasks,
                              const std::vector<std::size_t>& dims) {
  json j;
  j["seed"] = cfg.seed;
  j["normalize_word_vectors"] = cfg.normalize;
  j["tokenizer"] = {{"lowercase", cfg.tokenizer.lowercase},
                    {"unicode_normalization", "NFC"}};
  j["split_ratios"] = {{"train", cfg.split[0]}, {"dev", cfg.split[1]}, {"test", cfg.split[2]}};
  const ProbeConfig p = cfg.effective_probe();
  j["probe"] = {{"hidden_units", p.hidden_units}, {"epochs", p.epochs},
                {"learning_rate", p.learning_rate}, {"batch_size", p.batch_size},
                {"seed", p.seed}, {"optimizer", "sgd"}, {"activation", "tanh"}};
  j["tasks"] = json::array();
  for (const auto& t : tasks) {
    json tj{{"name", t.spec.name},
            {"kind", to_string(t.spec.kind)},
            {"measure", to_string(t.measure())},
            {"items", t.size()},
            {"train", t.splits().train.size()},
            {"dev", t.splits().dev.size()},
            {"test", t.splits().test.size()},
            {"split_source", t.splits_from_file ? "file" : "generated"}};
    if (!t.splits_from_file) tj["split_seed"] = t.split_seed;
    if (!t.spec.path.empty()) tj["path"] = t.spec.path;
    if (t.builtin_lexicon) {
      tj["generator_seed"] = t.spec.seed.value_or(cfg.seed);
      tj["dim"] = t.spec.dim;
    }
    j["tasks"].push_back(tj);
  }
  j["methods"] = json::array();
  for (const auto& m : cfg.methods) {
    json mj{{"name", m.name}};
    if (!m.lexicon) {
      mj["sentence_vectors"] = m.sentence_vectors;
    } else {
      const LexiconSpec& lex = *m.lexicon;
      json lj;
      switch (lex.kind) {
        case LexiconSpec::Kind::kTask: lj["kind"] = "task"; break;
        case LexiconSpec::Kind::kRandom:
          lj["kind"] = "random";
          lj["seed"] = lex.seed.value_or(cfg.seed);
          if (lex.dim) lj["dim"] = *lex.dim;
          break;
        case LexiconSpec::Kind::kFile:
          lj["kind"] = "file";
          lj["path"] = lex.path;
          if (lex.dim) lj["dim"] = *lex.dim;
          break;
      }
      mj["lexicon"] = lj;
      json sj;
      switch (m.strategy.kind) {
        case StrategySpec::Kind::kMean: sj["kind"] = "mean"; break;
        case StrategySpec::Kind::kMeanMax: sj["kind"] = "mean_max"; break;
        case StrategySpec::Kind::kSif: {
          sj["kind"] = "sif";
          sj["a"] = m.strategy.a;
          sj["frequencies"] =
              m.strategy.frequencies.empty() ? "task sentences" : m.strategy.frequencies;
          sj["component_fit"] = "train split";
          const PowerIterationOptions power;
          sj["power_iteration"] = {{"max_iterations", power.max_iterations},
                                   {"tolerance", power.tolerance},
                                   {"seed", power.seed}};
          break;
        }
      }
      mj["strategy"] = sj;
    }
    j["methods"].push_back(mj);
  }
  if (!dims.empty()) j["dims"] = dims;
  return j.dump(2) + "\n";
}

void write_run_outputs(const RunConfig& cfg, const RunOutput& out) {
  const fs::path dir(cfg.output_dir);
  write_matrix_files(cfg, out.matrix, dir, true);
  write_file(dir / "run-metadata.json", run_metadata_json(cfg, out.tasks));
}

void write_sweep_outputs(const RunConfig& cfg, const SweepResult& sweep) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  for (std::size_t i = 0; i < sweep.dims.size(); ++i)
    write_matrix_files(cfg, sweep.matrices[i], dir / ("dim-" + std::to_string(sweep.dims[i])),
                       false);
  if (wants(cfg, OutputFormat::kCsv)) write_file(dir / "sweep.csv", render_sweep_csv(sweep));
  if (wants(cfg, OutputFormat::kSvg) && !sweep.matrices.empty())
    for (std::size_t t = 0; t < sweep.matrices.front().tasks.size(); ++t)
      write_file(dir / (file_stem(sweep.matrices.front().tasks[t]) + ".svg"),
                 render_sweep_svg(sweep, t));
  write_file(dir / "run-metadata.json", run_metadata_json(cfg, sweep.tasks, sweep.dims));
}

}  // namespace sentvec
