#include "sentvec/lexicon.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "sentvec/text.h"

namespace sentvec {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view s, double* out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

template <typename Int>
bool parse_int(std::string_view s, Int* out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

Vector parse_components(std::span<const std::string_view> fields,
                        std::size_t line_no) {
  Vector v(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (!parse_double(fields[i], &v[i]))
      throw ParseError(line_no, "non-numeric component '" +
                                    std::string(fields[i]) + "'");
    if (!std::isfinite(v[i]))
      throw ParseError(line_no, "non-finite component");
  }
  return v;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return in;
}

void write_components(std::ostream& out, std::span<const double> v,
                      char first_sep) {
  for (std::size_t i = 0; i < v.size(); ++i)
    out << (i == 0 ? first_sep : ' ') << v[i];
}

}  // namespace

WordVectorTable::WordVectorTable(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ValidationError("word vector dimension must be positive");
}

bool WordVectorTable::insert(std::string word, std::span<const double> vector) {
  if (vector.size() != dim_)
    throw ValidationError("vector for '" + word + "' has " +
                          std::to_string(vector.size()) + " components, expected " +
                          std::to_string(dim_));
  for (double x : vector)
    if (!std::isfinite(x))
      throw ValidationError("non-finite component in vector for '" + word + "'");
  auto [it, inserted] = index_.try_emplace(word, words_.size());
  if (!inserted) return false;
  words_.push_back(std::move(word));
  data_.insert(data_.end(), vector.begin(), vector.end());
  return true;
}

std::span<const double> WordVectorTable::lookup(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return {};
  return vector_at(it->second);
}

void SentenceVectorTable::insert(std::string id, std::span<const double> vector) {
  if (vector.size() != dim_)
    throw ValidationError("sentence vector '" + id + "' has " +
                          std::to_string(vector.size()) + " components, expected " +
                          std::to_string(dim_));
  for (double x : vector)
    if (!std::isfinite(x))
      throw ValidationError("non-finite component in sentence vector '" + id + "'");
  if (!index_.try_emplace(id, ids_.size()).second)
    throw ValidationError("duplicate sentence id '" + id + "'");
  ids_.push_back(std::move(id));
  data_.insert(data_.end(), vector.begin(), vector.end());
}

std::span<const double> SentenceVectorTable::lookup(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return {};
  return {data_.data() + it->second * dim_, dim_};
}

WordVectorTable load_word_vectors(std::istream& in,
                                  std::optional<std::size_t> expected_dim) {
  if (expected_dim && *expected_dim == 0)
    throw ValidationError("expected dimension must be positive");

  std::optional<WordVectorTable> table;
  std::optional<std::size_t> dim = expected_dim;
  bool first_line = true;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = chomp(raw);
    auto fields = split_fields(line);
    if (fields.empty()) continue;

    if (first_line) {
      first_line = false;
      std::uint64_t count = 0;
      std::size_t header_dim = 0;
      if (fields.size() == 2 && parse_int(fields[0], &count) &&
          parse_int(fields[1], &header_dim)) {
        if (header_dim == 0) throw ParseError(line_no, "header dimension is 0");
        if (expected_dim && *expected_dim != header_dim)
          throw ParseError(line_no, "header dimension " +
                                        std::to_string(header_dim) +
                                        " differs from expected " +
                                        std::to_string(*expected_dim));
        dim = header_dim;
        continue;
      }
    }

    if (fields.size() < 2)
      throw ParseError(line_no, "expected a word followed by its components");
    const std::size_t n = fields.size() - 1;
    if (!dim) dim = n;
    if (n != *dim)
      throw ParseError(line_no, "expected " + std::to_string(*dim) +
                                    " components, found " + std::to_string(n));
    if (!table) table.emplace(*dim);
    Vector v = parse_components(std::span(fields).subspan(1), line_no);
    if (!table->insert(nfc(fields[0]), v)) table->note_duplicate();
  }
  if (!table) throw ParseError(0, "word vector input is empty");
  return std::move(*table);
}

WordVectorTable load_word_vectors_file(const std::string& path,
                                       std::optional<std::size_t> expected_dim) {
  auto in = open_or_throw(path);
  try {
    return load_word_vectors(in, expected_dim);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
}

void write_word_vectors(std::ostream& out, const WordVectorTable& table,
                        bool header) {
  const auto old_precision = out.precision(17);
  if (header) out << table.size() << ' ' << table.dim() << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.words()[i];
    write_components(out, table.vector_at(i), ' ');
    out << '\n';
  }
  out.precision(old_precision);
}

FrequencyTable load_frequency_table(std::istream& in) {
  FrequencyTable ft;
  std::optional<std::uint64_t> declared_total;
  std::uint64_t sum = 0;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto fields = split_fields(chomp(raw));
    if (fields.empty()) continue;
    if (fields[0] == "#total") {
      std::uint64_t total = 0;
      if (fields.size() != 2 || !parse_int(fields[1], &total) || total == 0)
        throw ParseError(line_no, "malformed '#total N' line");
      declared_total = total;
      continue;
    }
    if (fields.size() != 2)
      throw ParseError(line_no, "expected 'word count'");
    std::uint64_t count = 0;
    if (!parse_int(fields[1], &count))
      throw ParseError(line_no, "count must be a nonnegative integer, got '" +
                                    std::string(fields[1]) + "'");
    auto [it, inserted] = ft.counts.try_emplace(nfc(fields[0]), count);
    if (!inserted) throw ParseError(line_no, "duplicate word '" + it->first + "'");
    sum += count;
  }
  ft.total = declared_total.value_or(sum);
  if (ft.total == 0) throw ParseError(0, "frequency table has zero total");
  for (const auto& [word, count] : ft.counts)
    if (count > ft.total)
      throw ParseError(0, "count of '" + word + "' exceeds the total");
  return ft;
}

FrequencyTable load_frequency_table_file(const std::string& path) {
  auto in = open_or_throw(path);
  try {
    return load_frequency_table(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
}

double unigram_probability(const FrequencyTable& ft, std::string_view word) {
  auto it = ft.counts.find(std::string(word));
  if (it == ft.counts.end() || ft.total == 0) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(ft.total);
}

SentenceVectorTable load_sentence_vector_table(std::istream& in) {
  std::optional<SentenceVectorTable> table;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = chomp(raw);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw ParseError(line_no, "expected 'id<TAB>components'");
    auto fields = split_fields(line.substr(tab + 1));
    if (fields.empty()) throw ParseError(line_no, "no components");
    Vector v = parse_components(fields, line_no);
    if (!table) table.emplace(v.size());
    if (v.size() != table->dim())
      throw ParseError(line_no, "expected " + std::to_string(table->dim()) +
                                    " components, found " + std::to_string(v.size()));
    std::string id(line.substr(0, tab));
    if (!table->lookup(id).empty())
      throw ParseError(line_no, "duplicate sentence id '" + id + "'");
    table->insert(std::move(id), v);
  }
  if (!table) throw ParseError(0, "sentence vector input is empty");
  return std::move(*table);
}

SentenceVectorTable load_sentence_vector_table_file(const std::string& path) {
  auto in = open_or_throw(path);
  try {
    return load_sentence_vector_table(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
}

void write_sentence_vector_table(std::ostream& out,
                                 const SentenceVectorTable& table) {
  const auto old_precision = out.precision(17);
  for (const auto& id : table.ids()) {
    out << id;
    write_components(out, table.lookup(id), '\t');
    out << '\n';
  }
  out.precision(old_precision);
}

WordVectorTable random_table(std::span<const std::string> vocab, std::size_t dim,
                             std::uint64_t seed) {
  if (dim == 0) throw ValidationError("random table dimension must be positive");
  if (vocab.empty()) throw ValidationError("random table vocabulary is empty");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  WordVectorTable table(dim);
  Vector v(dim);
  for (const auto& word : vocab) {
    for (double& x : v) x = gauss(rng);
    if (!table.insert(word, v))
      throw ValidationError("duplicate word '" + word + "' in vocabulary");
  }
  return table;
}

Vector normalize(std::span<const double> v) {
  const double norm = std::sqrt(dot(v, v));
  if (norm == 0.0) throw DegenerateInputError("cannot normalize a zero vector");
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return out;
}

std::vector<Vector> sentence_token_vectors(const WordVectorTable& table,
                                           std::span<const std::string> tokens,
                                           bool do_normalize) {
  std::vector<Vector> out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) {
    auto v = table.lookup(token);
    if (v.empty()) continue;
    if (!do_normalize) {
      out.emplace_back(v.begin(), v.end());
    } else if (dot(v, v) > 0.0) {
      out.push_back(normalize(v));
    }  // zero vectors have no direction and are skipped like OOV tokens

  }
  return out;
}

}  // namespace sentvec
