#include "sentvec/tasks.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace sentvec {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

// Re-throws text errors with the line number attached.
template <typename Fn>
auto at_line(std::size_t line_no, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    if (e.line() != 0) throw;
    throw ParseError(line_no, e.what());
  }
}

Vector unit_gaussian(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(dim);
  for (double& x : v) x = gauss(rng);
  return normalize(v);
}

// centroid + noise * z / sqrt(dim), z standard normal.
Vector jitter(std::mt19937_64& rng, const Vector& centroid, double noise) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = noise / std::sqrt(static_cast<double>(centroid.size()));
  Vector v = centroid;
  for (double& x : v) x += scale * gauss(rng);
  return v;
}

std::string join(const Sentence& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

const char* to_string(Entailment e) {
  switch (e) {
    case Entailment::kEntailment: return "entailment";
    case Entailment::kNeutral: return "neutral";
    case Entailment::kContradiction: return "contradiction";
  }
  return "?";
}

Entailment parse_entailment(std::string_view s) {
  const std::string l = ascii_lower(trim(s));
  if (l == "entailment") return Entailment::kEntailment;
  if (l == "neutral") return Entailment::kNeutral;
  if (l == "contradiction") return Entailment::kContradiction;
  throw ValidationError("unknown entailment label '" + std::string(s) + "'");
}

ClassificationTask load_classification_tsv(
    std::istream& in, const std::optional<std::vector<std::string>>& label_set,
    const TokenizerOptions& tokenizer) {
  ClassificationTask task;
  std::unordered_map<std::string, std::size_t> label_index;
  if (label_set) {
    for (const auto& l : *label_set) {
      const std::string key = nfc(l);
      if (!label_index.try_emplace(key, task.labels.size()).second)
        throw ValidationError("duplicate label '" + key + "' in label set");
      task.labels.push_back(key);
    }
  }

  std::optional<bool> has_split;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = chomp(raw);
    if (trim(line).empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 2) throw ParseError(line_no, "missing tab after label");
    if (fields.size() > 3) throw ParseError(line_no, "too many columns");

    const std::string label = at_line(line_no, [&] { return nfc(trim(fields[0])); });
    if (label.empty()) throw ParseError(line_no, "empty label");
    auto it = label_index.find(label);
    if (it == label_index.end()) {
      if (label_set) throw ParseError(line_no, "unknown label '" + label + "'");
      it = label_index.emplace(label, task.labels.size()).first;
      task.labels.push_back(label);
    }

    ClassificationItem item;
    item.text = at_line(line_no, [&] { return nfc(fields[1]); });
    item.tokens = at_line(line_no, [&] { return tokenize(item.text, tokenizer); });
    item.label = it->second;

    const bool row_has_split = fields.size() == 3;
    if (!has_split) has_split = row_has_split;
    if (*has_split != row_has_split)
      throw ParseError(line_no, "split column present on some rows only");
    const std::size_t index = task.items.size();
    if (row_has_split) {
      const std::string s = ascii_lower(trim(fields[2]));
      if (s == "train") task.splits.train.push_back(index);
      else if (s == "dev") task.splits.dev.push_back(index);
      else if (s == "test") task.splits.test.push_back(index);
      else throw ParseError(line_no, "unknown split '" + std::string(fields[2]) + "'");
    }
    task.items.push_back(std::move(item));
  }
  if (task.items.empty()) throw ParseError(0, "classification input is empty");
  return task;
}

PairTask load_sick_tsv(std::istream& in, const TokenizerOptions& tokenizer) {
  std::string raw;
  std::size_t line_no = 0;
  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, raw)) {
    ++line_no;
    if (trim(chomp(raw)).empty()) continue;
    header_line = std::string(chomp(raw));
    header = split_tabs(header_line);
    break;
  }
  if (header.empty()) throw ParseError(0, "SICK input is empty");

  auto column = [&](std::initializer_list<std::string_view> names,
                    bool required) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      for (auto name : names)
        if (ascii_lower(trim(header[i])) == ascii_lower(name)) return i;
    if (required)
      throw ParseError(line_no, "missing column '" + std::string(*names.begin()) + "'");
    return std::nullopt;
  };
  const std::size_t c_id = *column({"pair_ID"}, true);
  const std::size_t c_a = *column({"sentence_A"}, true);
  const std::size_t c_b = *column({"sentence_B"}, true);
  const std::size_t c_score = *column({"relatedness_score"}, true);
  const std::size_t c_label =
      *column({"entailment_judgment", "entailment_label"}, true);
  const auto c_set = column({"SemEval_set"}, false);

  PairTask task;
  std::unordered_set<std::string> ids;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = chomp(raw);
    if (trim(line).empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != header.size())
      throw ParseError(line_no, "expected " + std::to_string(header.size()) +
                                    " columns, found " + std::to_string(fields.size()));
    PairItem item;
    item.id = trim(fields[c_id]);
    if (item.id.empty()) throw ParseError(line_no, "empty pair_ID");
    if (!ids.insert(item.id).second)
      throw ParseError(line_no, "duplicate pair_ID '" + item.id + "'");
    at_line(line_no, [&] {
      item.text_a = nfc(fields[c_a]);
      item.text_b = nfc(fields[c_b]);
      item.tokens_a = tokenize(item.text_a, tokenizer);
      item.tokens_b = tokenize(item.text_b, tokenizer);
      return 0;
    });

    const std::string score = trim(fields[c_score]);
    std::size_t used = 0;
    try {
      item.relatedness = std::stod(score, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != score.size())
      throw ParseError(line_no, "relatedness '" + score + "' is not a number");
    if (!(item.relatedness >= 1.0 && item.relatedness <= 5.0))
      throw ParseError(line_no, "relatedness " + score + " outside [1, 5]");

    try {
      item.entailment = parse_entailment(fields[c_label]);
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }

    const std::size_t index = task.items.size();
    if (c_set) {
      const std::string s = ascii_lower(trim(fields[*c_set]));
      if (s == "train") task.splits.train.push_back(index);
      else if (s == "trial") task.splits.dev.push_back(index);
      else if (s == "test") task.splits.test.push_back(index);
      else throw ParseError(line_no, "unknown SemEval_set '" + std::string(fields[*c_set]) + "'");
    }
    task.items.push_back(std::move(item));
  }
  if (task.items.empty()) throw ParseError(0, "SICK input has no rows");
  return task;
}

Splits make_splits(std::size_t n, const SplitRatios& ratios, std::uint64_t seed) {
  for (double r : ratios)
    if (!(r >= 0.0) || !std::isfinite(r))
      throw ValidationError("split ratios must be nonnegative");
  if (!(ratios[0] > 0.0)) throw ValidationError("train ratio must be positive");
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("split ratios sum to " + std::to_string(sum) + ", not 1");
  if (n < 3) throw ValidationError("splitting needs at least 3 items");

  const double dn = static_cast<double>(n);
  const std::size_t n_dev = std::min(n, static_cast<std::size_t>(std::llround(dn * ratios[1])));
  const std::size_t n_test =
      std::min(n - n_dev, static_cast<std::size_t>(std::llround(dn * ratios[2])));
  const std::size_t n_train = n - n_dev - n_test;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  Splits s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.dev.assign(order.begin() + n_train, order.begin() + n_train + n_dev);
  s.test.assign(order.begin() + n_train + n_dev, order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.dev.begin(), s.dev.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::pair<ClassificationTask, WordVectorTable> synthetic_classification(
    std::size_t classes, std::size_t items, std::size_t vocab_per_class,
    std::uint64_t seed, std::size_t dim) {
  if (classes < 2) throw ValidationError("synthetic task needs at least 2 classes");
  if (items < classes) throw ValidationError("synthetic task needs items >= classes");
  if (vocab_per_class == 0) throw ValidationError("vocab_per_class must be positive");
  if (dim == 0) throw ValidationError("dimension must be positive");

  ClassificationTask task;
  task.name = "synthetic-classification";
  std::vector<std::vector<std::string>> vocab(classes);
  for (std::size_t k = 0; k < classes; ++k) {
    task.labels.push_back("class" + std::to_string(k));
    for (std::size_t j = 0; j < vocab_per_class; ++j)
      vocab[k].push_back("c" + std::to_string(k) + "_w" + std::to_string(j));
  }

  std::mt19937_64 text_rng(seed);
  std::vector<std::size_t> labels(items);
  for (std::size_t i = 0; i < items; ++i) labels[i] = i % classes;
  std::shuffle(labels.begin(), labels.end(), text_rng);
  std::uniform_int_distribution<std::size_t> length(3, 8);
  std::uniform_int_distribution<std::size_t> pick(0, vocab_per_class - 1);
  for (std::size_t i = 0; i < items; ++i) {
    ClassificationItem item;
    item.label = labels[i];
    const std::size_t len = length(text_rng);
    for (std::size_t t = 0; t < len; ++t)
      item.tokens.push_back(vocab[item.label][pick(text_rng)]);
    item.text = join(item.tokens);
    task.items.push_back(std::move(item));
  }

  std::seed_seq seq{seed, static_cast<std::uint64_t>(dim), std::uint64_t{1}};
  std::mt19937_64 vec_rng(seq);
  WordVectorTable table(dim);
  for (std::size_t k = 0; k < classes; ++k) {
    const Vector centroid = unit_gaussian(vec_rng, dim);
    for (const auto& word : vocab[k]) table.insert(word, jitter(vec_rng, centroid, 1.0));
  }
  return {std::move(task), std::move(table)};
}

double token_jaccard(const Sentence& a, const Sentence& b) {
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& w : sa) common += sb.count(w);
  return static_cast<double>(common) /
         static_cast<double>(sa.size() + sb.size() - common);
}

std::pair<double, Entailment> overlap_judgment(const Sentence& a, const Sentence& b) {
  const double j = token_jaccard(a, b);
  const double score = std::round((1.0 + 4.0 * j) * 10.0) / 10.0;
  Entailment e = Entailment::kNeutral;
  if (j >= 0.7) e = Entailment::kEntailment;
  else if (j <= 0.1) e = Entailment::kContradiction;
  return {score, e};
}

std::pair<PairTask, WordVectorTable> synthetic_relatedness(std::size_t pairs,
                                                           std::size_t dim,
                                                           std::uint64_t seed) {
  if (pairs < 10) throw ValidationError("synthetic relatedness needs >= 10 pairs");
  if (dim == 0) throw ValidationError("dimension must be positive");
  constexpr std::size_t kVocab = 80;
  constexpr std::size_t kTopics = 4;

  std::vector<std::string> vocab;
  for (std::size_t j = 0; j < kVocab; ++j) vocab.push_back("w" + std::to_string(j));

  PairTask task;
  task.name = "synthetic-relatedness";
  std::mt19937_64 text_rng(seed);
  std::uniform_int_distribution<std::size_t> length(4, 8);
  for (std::size_t i = 0; i < pairs; ++i) {
    std::vector<std::size_t> order(kVocab);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), text_rng);
    const std::size_t len_a = length(text_rng);
    const std::size_t shared =
        std::uniform_int_distribution<std::size_t>(0, len_a)(text_rng);
    const std::size_t len_b = std::max(shared, length(text_rng));
    PairItem item;
    item.id = std::to_string(i + 1);
    for (std::size_t t = 0; t < len_a; ++t) item.tokens_a.push_back(vocab[order[t]]);
    for (std::size_t t = 0; t < shared; ++t) item.tokens_b.push_back(item.tokens_a[t]);
    for (std::size_t t = shared; t < len_b; ++t)
      item.tokens_b.push_back(vocab[order[len_a + t - shared]]);
    std::shuffle(item.tokens_b.begin(), item.tokens_b.end(), text_rng);
    item.text_a = join(item.tokens_a);
    item.text_b = join(item.tokens_b);
    std::tie(item.relatedness, item.entailment) =
        overlap_judgment(item.tokens_a, item.tokens_b);
    task.items.push_back(std::move(item));
  }

  std::seed_seq seq{seed, static_cast<std::uint64_t>(dim), std::uint64_t{2}};
  std::mt19937_64 vec_rng(seq);
  std::vector<Vector> centroids;
  for (std::size_t t = 0; t < kTopics; ++t) centroids.push_back(unit_gaussian(vec_rng, dim));
  WordVectorTable table(dim);
  for (std::size_t j = 0; j < kVocab; ++j)
    table.insert(vocab[j], jitter(vec_rng, centroids[j % kTopics], 1.5));
  return {std::move(task), std::move(table)};
}

}  // namespace sentvec
