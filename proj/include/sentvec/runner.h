#ifndef SENTVEC_RUNNER_H_
#define SENTVEC_RUNNER_H_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sentvec/aggregate.h"
#include "sentvec/config.h"
#include "sentvec/lexicon.h"
#include "sentvec/metrics.h"
#include "sentvec/probe.h"
#include "sentvec/tasks.h"

namespace sentvec {

// Failure of one (method, task) cell; aborts the run (CLI exit code 2).
class CellError : public std::runtime_error {
 public:
  CellError(const std::string& method, const std::string& task, const std::string& what)
      : std::runtime_error("cell (method '" + method + "', task '" + task + "'): " + what) {}
};

// A task ready for evaluation: data, splits and, for synthetic tasks, the
// generated lexicon.
struct LoadedTask {
  TaskSpec spec;
  std::optional<ClassificationTask> classification;
  std::optional<PairTask> pairs;
  std::shared_ptr<const WordVectorTable> builtin_lexicon;
  bool splits_from_file = false;
  std::uint64_t split_seed = 0;

  Measure measure() const { return measure_of(spec.kind); }
  std::size_t size() const;
  const Splits& splits() const;
  // Classification: one per item. Pairs: A and B interleaved (2i, 2i + 1).
  std::vector<Sentence> sentences() const;
  // Ids used in sentence-vector files: "<row>" (1-based) for classification,
  // "<pair_ID>:A" / "<pair_ID>:B" for pairs; same order as sentences().
  std::vector<std::string> sentence_ids() const;
  // Sorted unique tokens over all sentences.
  std::vector<std::string> vocabulary() const;
};

// Loads or generates the task and assigns splits when the source has none.
// `dim_override` regenerates synthetic lexicons at another dimension.
LoadedTask load_task(const TaskSpec& spec, const RunConfig& cfg,
                     std::optional<std::size_t> dim_override = {});

// Word- or sentence-vector files shared by every cell of a run.
class ResourceCache {
 public:
  std::shared_ptr<const WordVectorTable> word_vectors(const std::string& path,
                                                      std::optional<std::size_t> dim);
  std::shared_ptr<const FrequencyTable> frequencies(const std::string& path);
  std::shared_ptr<const SentenceVectorTable> sentence_vectors(const std::string& path);

 private:
  std::map<std::string, std::shared_ptr<const WordVectorTable>> words_;
  std::map<std::string, std::shared_ptr<const FrequencyTable>> freqs_;
  std::map<std::string, std::shared_ptr<const SentenceVectorTable>> sentences_;
};

// A method bound to one task.
struct ResolvedMethod {
  std::string name;
  std::shared_ptr<const WordVectorTable> lexicon;
  std::shared_ptr<const SentenceVectorTable> sentence_vectors;
  AggregationStrategy strategy;
};

// Binds `method` to `task`, loading files through `cache`. Random lexicons
// are drawn over the task vocabulary.
ResolvedMethod resolve_method(const MethodSpec& method, const LoadedTask& task,
                              const RunConfig& cfg, ResourceCache& cache,
                              std::optional<std::size_t> dim_override = {});

// Sentence matrix of the task under the method. SIF fits its common
// component on the training rows.
Matrix embed_task(const LoadedTask& task, const ResolvedMethod& method, bool normalize,
                  unsigned workers = 1);

// Embeds, trains the probe on train, scores test: accuracy for
// classification/entailment, Pearson for relatedness. Dev is not used.
EvalResult run_task(const LoadedTask& task, const ResolvedMethod& method,
                    const ProbeConfig& probe_cfg, bool normalize = true);

struct ResultMatrix {
  std::vector<std::string> methods;  // rows
  std::vector<std::string> tasks;    // columns
  std::vector<Measure> measures;     // per task
  std::vector<EvalResult> cells;     // row-major

  const EvalResult& at(std::size_t method, std::size_t task) const {
    return cells[method * tasks.size() + task];
  }
};

struct RunOutput {
  ResultMatrix matrix;
  std::vector<LoadedTask> tasks;
};

// Loads tasks and resources, then evaluates every cell on cfg.workers
// threads. Results do not depend on the worker count.
RunOutput run_matrix(const RunConfig& cfg, std::optional<std::size_t> dim_override = {});

struct SweepResult {
  std::vector<std::size_t> dims;
  std::vector<ResultMatrix> matrices;  // one per dim
  std::vector<LoadedTask> tasks;       // as loaded for the first dim
};

// Runs the matrix once per dimension. Random lexicons take the swept dim,
// file lexicons substitute "{dim}" into their path, synthetic task lexicons
// are regenerated. Every per-dim file is checked before anything runs.
SweepResult dim_sweep(const RunConfig& cfg, const std::vector<std::size_t>& dims);

// Checks that every referenced file exists and that task files parse.
void validate_run(const RunConfig& cfg, const std::vector<std::size_t>& dims = {});

// Metadata block: seeds, split ratios and sources, probe and strategy
// parameters. Deterministic (no timestamps, no worker count).
std::string run_metadata_json(const RunConfig& cfg, const std::vector<LoadedTask>& tasks,
                              const std::vector<std::size_t>& dims = {});

// Writes the requested formats into cfg.output_dir (created if needed).
void write_run_outputs(const RunConfig& cfg, const RunOutput& out);
void write_sweep_outputs(const RunConfig& cfg, const SweepResult& sweep);

}  // namespace sentvec

#endif  // SENTVEC_RUNNER_H_
