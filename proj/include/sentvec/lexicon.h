#ifndef SENTVEC_LEXICON_H_
#define SENTVEC_LEXICON_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sentvec/common.h"

namespace sentvec {

// Word -> d-dimensional vector. Insertion order is preserved; the table is
// immutable once built and safe for concurrent readers.
class WordVectorTable {
 public:
  explicit WordVectorTable(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  // Returns false (and keeps the existing vector) when `word` is already
  // present. Throws ValidationError on a wrong length or non-finite value.
  bool insert(std::string word, std::span<const double> vector);

  // Empty span for unknown words.
  std::span<const double> lookup(std::string_view word) const;
  bool contains(std::string_view word) const { return !lookup(word).empty(); }

  const std::vector<std::string>& words() const { return words_; }
  std::span<const double> vector_at(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  // Number of duplicate words dropped while loading.
  std::size_t duplicate_count() const { return duplicates_; }
  void note_duplicate() { ++duplicates_; }

 private:
  std::size_t dim_;
  std::vector<std::string> words_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t duplicates_ = 0;
};

struct FrequencyTable {
  std::unordered_map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;
};

// Sentence id -> vector, for sentence encoders run outside this toolkit.
class SentenceVectorTable {
 public:
  explicit SentenceVectorTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }

  // Throws ValidationError on a duplicate id or wrong length.
  void insert(std::string id, std::span<const double> vector);
  std::span<const double> lookup(std::string_view id) const;
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Text word-vector format: `word v1 ... vd` per line with an optional
// `count dim` header (a first line of exactly two integers).
WordVectorTable load_word_vectors(std::istream& in,
                                  std::optional<std::size_t> expected_dim = {});
WordVectorTable load_word_vectors_file(
    const std::string& path, std::optional<std::size_t> expected_dim = {});
void write_word_vectors(std::ostream& out, const WordVectorTable& table,
                        bool header = true);

// `word count` per line; an optional first line `#total N` sets the total,
// otherwise the total is the sum of counts.
FrequencyTable load_frequency_table(std::istream& in);
FrequencyTable load_frequency_table_file(const std::string& path);

double unigram_probability(const FrequencyTable& ft, std::string_view word);

// `id<TAB>v1 v2 ... vd` per line.
SentenceVectorTable load_sentence_vector_table(std::istream& in);
SentenceVectorTable load_sentence_vector_table_file(const std::string& path);
void write_sentence_vector_table(std::ostream& out,
                                 const SentenceVectorTable& table);

// Standard-Gaussian vectors, a pure function of (vocab, dim, seed).
WordVectorTable random_table(std::span<const std::string> vocab, std::size_t dim,
                             std::uint64_t seed);

// Throws DegenerateInputError for the zero vector.
Vector normalize(std::span<const double> v);

// In-vocabulary token vectors in sentence order; OOV tokens are skipped.
// With `do_normalize`, all-zero word vectors are skipped as well.
std::vector<Vector> sentence_token_vectors(const WordVectorTable& table,
                                           std::span<const std::string> tokens,
                                           bool do_normalize);

}  // namespace sentvec

#endif  // SENTVEC_LEXICON_H_
