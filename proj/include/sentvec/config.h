#ifndef SENTVEC_CONFIG_H_
#define SENTVEC_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sentvec/aggregate.h"
#include "sentvec/metrics.h"
#include "sentvec/probe.h"
#include "sentvec/tasks.h"
#include "sentvec/text.h"

namespace sentvec {

// Invalid run configuration (CLI exit code 1).
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

enum class TaskKind {
  kClassification,           // label<TAB>sentence file
  kSickEntailment,           // SICK file, entailment labels
  kSickRelatedness,          // SICK file, relatedness scores
  kSyntheticClassification,
  kSyntheticRelatedness,
  kSyntheticEntailment,
};

const char* to_string(TaskKind kind);
bool is_pair_task(TaskKind kind);
Measure measure_of(TaskKind kind);

struct TaskSpec {
  std::string name;
  TaskKind kind = TaskKind::kClassification;
  std::string path;                                  // file tasks
  std::optional<std::vector<std::string>> labels;    // classification
  std::size_t classes = 2;                           // synthetic
  std::size_t items = 200;
  std::size_t vocab_per_class = 20;
  std::size_t dim = 16;
  std::optional<std::uint64_t> seed;        // synthetic; default run seed
  std::optional<std::uint64_t> split_seed;  // default run seed
};

struct LexiconSpec {
  enum class Kind { kTask, kRandom, kFile };
  Kind kind = Kind::kTask;
  std::string path;  // may contain "{dim}"
  std::optional<std::size_t> dim;
  std::optional<std::uint64_t> seed;
};

struct StrategySpec {
  enum class Kind { kMean, kSif, kMeanMax };
  Kind kind = Kind::kMean;
  double a = kDefaultSifA;
  std::string frequencies;  // empty: counts from the task's own sentences
};

struct MethodSpec {
  std::string name;
  std::optional<LexiconSpec> lexicon;    // exactly one of lexicon and
  std::string sentence_vectors;          // sentence_vectors (may use "{task}")
  StrategySpec strategy;
};

enum class OutputFormat { kCsv, kJson, kMarkdown, kSvg };

struct RunConfig {
  std::vector<TaskSpec> tasks;
  std::vector<MethodSpec> methods;
  ProbeConfig probe;
  bool probe_seed_set = false;
  SplitRatios split = kDefaultSplitRatios;
  TokenizerOptions tokenizer;
  bool normalize = true;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string output_dir = "results";
  std::vector<OutputFormat> formats{OutputFormat::kCsv, OutputFormat::kJson,
                                    OutputFormat::kMarkdown, OutputFormat::kSvg};

  // Structural checks: at least one task and method, unique names, ranges.
  void validate() const;
  // Probe seed: explicit probe.seed, else the run seed.
  ProbeConfig effective_probe() const;
};

// Parses the JSON configuration. Relative paths are resolved against
// `base_dir`. Throws ConfigError.
RunConfig parse_run_config(std::string_view json_text, const std::string& base_dir);
RunConfig load_run_config(const std::string& path);

std::vector<OutputFormat> parse_formats(std::string_view comma_list);
std::vector<std::size_t> parse_dims(std::string_view comma_list);

// "{dim}" / "{task}" substitution.
std::string substitute(std::string pattern, std::string_view key, std::string_view value);

}  // namespace sentvec

#endif  // SENTVEC_CONFIG_H_
