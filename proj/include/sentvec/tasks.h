#ifndef SENTVEC_TASKS_H_
#define SENTVEC_TASKS_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sentvec/common.h"
#include "sentvec/lexicon.h"
#include "sentvec/text.h"

namespace sentvec {

struct Splits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;
  std::vector<std::size_t> test;

  bool assigned() const { return !train.empty() || !dev.empty() || !test.empty(); }
  bool operator==(const Splits&) const = default;
};

struct ClassificationItem {
  std::string text;  // NFC
  Sentence tokens;
  std::size_t label = 0;  // index into ClassificationTask::labels
};

struct ClassificationTask {
  std::string name;
  std::vector<std::string> labels;
  std::vector<ClassificationItem> items;
  Splits splits;
};

enum class Entailment { kEntailment = 0, kNeutral = 1, kContradiction = 2 };
inline constexpr std::size_t kEntailmentClasses = 3;
inline constexpr std::size_t kRelatednessBins = 5;

const char* to_string(Entailment e);
// Case-insensitive; throws ValidationError for anything else.
Entailment parse_entailment(std::string_view s);

struct PairItem {
  std::string id;
  std::string text_a;
  std::string text_b;
  Sentence tokens_a;
  Sentence tokens_b;
  double relatedness = 1.0;  // [1, 5]
  Entailment entailment = Entailment::kNeutral;
};

struct PairTask {
  std::string name;
  std::vector<PairItem> items;
  Splits splits;
};

// `label<TAB>sentence[<TAB>train|dev|test]` per line. Without a split column
// the splits stay unassigned. With `label_set`, unknown labels are an error;
// otherwise labels are collected in order of first appearance.
ClassificationTask load_classification_tsv(
    std::istream& in, const std::optional<std::vector<std::string>>& label_set = {},
    const TokenizerOptions& tokenizer = {});

// Header line, then pair_ID, sentence_A, sentence_B, relatedness_score,
// entailment_judgment (or entailment_label) and optionally SemEval_set,
// located by header name. TRAIN/TRIAL/TEST map to train/dev/test.
PairTask load_sick_tsv(std::istream& in, const TokenizerOptions& tokenizer = {});

using SplitRatios = std::array<double, 3>;  // train, dev, test
inline constexpr SplitRatios kDefaultSplitRatios{0.8, 0.1, 0.1};

// Seeded shuffle, then contiguous train/dev/test blocks. Dev and test sizes
// are rounded; the remainder goes to train. Index lists are sorted.
Splits make_splits(std::size_t n, const SplitRatios& ratios, std::uint64_t seed);

template <typename Task>
Task split(Task task, const SplitRatios& ratios, std::uint64_t seed) {
  task.splits = make_splits(task.items.size(), ratios, seed);
  return task;
}

// K classes with disjoint vocabularies ("c<k>_w<j>") whose vectors cluster
// around per-class centroids; sentences draw 3-8 words from their class.
// Sentences depend only on the seed; vectors on (seed, dim).
std::pair<ClassificationTask, WordVectorTable> synthetic_classification(
    std::size_t classes, std::size_t items, std::size_t vocab_per_class,
    std::uint64_t seed, std::size_t dim = 16);

// Relatedness 1 + 4 * Jaccard(token sets), rounded to 0.1; entailment for
// overlap >= 0.7, contradiction for overlap <= 0.1, neutral otherwise.
double token_jaccard(const Sentence& a, const Sentence& b);
std::pair<double, Entailment> overlap_judgment(const Sentence& a, const Sentence& b);

// Pairs over a shared clustered lexicon with overlap spread over [0, 1].
std::pair<PairTask, WordVectorTable> synthetic_relatedness(std::size_t pairs,
                                                           std::size_t dim,
                                                           std::uint64_t seed);

}  // namespace sentvec

#endif  // SENTVEC_TASKS_H_
