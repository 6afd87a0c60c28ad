#ifndef SENTVEC_METRICS_H_
#define SENTVEC_METRICS_H_

#include <algorithm>
#include <map>
#include <span>
#include <string>

#include "sentvec/common.h"

namespace sentvec {

enum class Measure { kAccuracy, kPearson };

const char* to_string(Measure m);

struct EvalResult {
  std::string task_name;
  std::string method_name;
  Measure measure = Measure::kAccuracy;
  double value = 0.0;
  std::size_t n = 0;

  // Range of the measure and n >= 1.
  void validate() const;
};

template <typename Label>
double accuracy(std::span<const Label> pred, std::span<const Label> gold) {
  if (pred.size() != gold.size())
    throw ValidationError("accuracy: " + std::to_string(pred.size()) +
                          " predictions for " + std::to_string(gold.size()) +
                          " gold labels");
  if (gold.empty()) throw ValidationError("accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) correct += pred[i] == gold[i];
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

// Frequency of the most common label.
template <typename Label>
double majority_baseline(std::span<const Label> gold) {
  if (gold.empty()) throw ValidationError("majority baseline: empty input");
  std::map<Label, std::size_t> counts;
  std::size_t best = 0;
  for (const auto& g : gold) best = std::max(best, ++counts[g]);
  return static_cast<double>(best) / static_cast<double>(gold.size());
}

// Sample Pearson correlation. Throws DegenerateInputError when either input
// is constant, ValidationError for n < 2 or mismatched lengths.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace sentvec

#endif  // SENTVEC_METRICS_H_
