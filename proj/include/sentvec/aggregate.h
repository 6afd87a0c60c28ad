#ifndef SENTVEC_AGGREGATE_H_
#define SENTVEC_AGGREGATE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <variant>

#include "sentvec/common.h"
#include "sentvec/lexicon.h"

namespace sentvec {

// Reductions of a token-vector sequence. `dim` is the expected vector length;
// an empty sequence yields zeros. Throws ValidationError on mixed lengths.
Vector mean_pool(std::span<const Vector> vs, std::size_t dim);
Vector max_pool(std::span<const Vector> vs, std::size_t dim);
// mean_pool followed by max_pool, length 2 * dim.
Vector mean_max_concat(std::span<const Vector> vs, std::size_t dim);

inline constexpr double kDefaultSifA = 1e-3;

// a / (a + p): 1 for unseen words, decreasing in p.
double sif_weight(double a, double p);

struct SifStrategy {
  double a = kDefaultSifA;
  std::shared_ptr<const FrequencyTable> freq;
  std::optional<Vector> component;  // unit length when set
};

struct MeanStrategy {};
struct MeanMaxStrategy {};

using AggregationStrategy =
    std::variant<MeanStrategy, SifStrategy, MeanMaxStrategy>;

std::size_t output_dim(const AggregationStrategy& strategy, std::size_t dim);

// (1/n) * sum_i sif_weight(a, p(token_i)) * v_i, followed by removal of
// `strategy.component` when present. Empty input gives zeros.
Vector sif_weighted_mean(std::span<const std::string> tokens,
                         std::span<const Vector> vs, const SifStrategy& strategy,
                         std::size_t dim);

struct PowerIterationOptions {
  int max_iterations = 1000;
  double tolerance = 1e-10;  // on the change of the unit direction
  std::uint64_t seed = 0x5eed;
};

// Dominant right singular vector of the uncentred matrix `m`, by power
// iteration on m^T m. The sign is fixed so that the first nonzero coordinate
// is positive. Throws DegenerateInputError for an all-zero matrix.
Vector fit_common_component(const Matrix& m,
                            const PowerIterationOptions& options = {});

// v - (v . c) c
Vector remove_common_component(std::span<const double> v,
                               std::span<const double> c);

struct EmbedOptions {
  bool normalize = true;    // unit-normalize word vectors before pooling
  unsigned workers = 1;
  PowerIterationOptions power;
};

// One row per sentence. For SIF, the weighted means of all rows are computed
// first, the common component is fitted on `fit_rows` only (unless the
// strategy already carries one) and then removed from every row. The fitted
// component is stored in `*fitted_component` when given.
Matrix embed_corpus(std::span<const Sentence> sentences,
                    const WordVectorTable& table,
                    const AggregationStrategy& strategy,
                    std::span<const std::size_t> fit_rows,
                    const EmbedOptions& options = {},
                    Vector* fitted_component = nullptr);

}  // namespace sentvec

#endif  // SENTVEC_AGGREGATE_H_
