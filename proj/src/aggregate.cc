#include "sentvec/aggregate.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "parallel.h"

namespace sentvec {
namespace {

void check_lengths(std::span<const Vector> vs, std::size_t dim) {
  for (const auto& v : vs)
    if (v.size() != dim)
      throw ValidationError("mixed vector lengths: expected " +
                            std::to_string(dim) + ", got " +
                            std::to_string(v.size()));
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

}  // namespace

Vector mean_pool(std::span<const Vector> vs, std::size_t dim) {
  check_lengths(vs, dim);
  Vector out(dim, 0.0);
  if (vs.empty()) return out;
  for (const auto& v : vs)
    for (std::size_t j = 0; j < dim; ++j) out[j] += v[j];
  const double n = static_cast<double>(vs.size());
  for (double& x : out) x /= n;
  return out;
}

Vector max_pool(std::span<const Vector> vs, std::size_t dim) {
  check_lengths(vs, dim);
  if (vs.empty()) return Vector(dim, 0.0);
  Vector out = vs.front();
  for (const auto& v : vs.subspan(1))
    for (std::size_t j = 0; j < dim; ++j) out[j] = std::max(out[j], v[j]);
  return out;
}

Vector mean_max_concat(std::span<const Vector> vs, std::size_t dim) {
  Vector out = mean_pool(vs, dim);
  Vector mx = max_pool(vs, dim);
  out.insert(out.end(), mx.begin(), mx.end());
  return out;
}

double sif_weight(double a, double p) {
  if (!(a > 0.0)) throw ValidationError("SIF parameter a must be positive");
  if (!(p >= 0.0 && p <= 1.0))
    throw ValidationError("probability must lie in [0, 1]");
  return a / (a + p);
}

std::size_t output_dim(const AggregationStrategy& strategy, std::size_t dim) {
  return std::holds_alternative<MeanMaxStrategy>(strategy) ? 2 * dim : dim;
}

Vector sif_weighted_mean(std::span<const std::string> tokens,
                         std::span<const Vector> vs, const SifStrategy& strategy,
                         std::size_t dim) {
  if (tokens.size() != vs.size())
    throw ValidationError("SIF: " + std::to_string(tokens.size()) +
                          " tokens but " + std::to_string(vs.size()) + " vectors");
  check_lengths(vs, dim);
  if (!strategy.freq) throw ValidationError("SIF: no frequency table");
  Vector out(dim, 0.0);
  if (vs.empty()) return out;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const double w =
        sif_weight(strategy.a, unigram_probability(*strategy.freq, tokens[i]));
    for (std::size_t j = 0; j < dim; ++j) out[j] += w * vs[i][j];
  }
  const double n = static_cast<double>(vs.size());
  for (double& x : out) x /= n;
  if (strategy.component) out = remove_common_component(out, *strategy.component);
  return out;
}

Vector fit_common_component(const Matrix& m, const PowerIterationOptions& options) {
  const std::size_t n = m.rows();
  const std::size_t d = m.cols();
  if (n == 0 || d == 0) throw ValidationError("common component: empty matrix");
  double max_abs = 0.0;
  for (double x : m.data()) {
    if (!std::isfinite(x))
      throw ValidationError("common component: non-finite matrix entry");
    max_abs = std::max(max_abs, std::abs(x));
  }
  if (max_abs == 0.0)
    throw DegenerateInputError("common component: all-zero matrix");

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(d);
  for (double& x : v) x = gauss(rng);
  v = normalize(v);

  Vector projected(n);
  Vector next(d);
  for (int it = 0; it < options.max_iterations; ++it) {
    // next = m^T (m v)
    for (std::size_t r = 0; r < n; ++r) projected[r] = dot(m.row(r), v);
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = m.row(r);
      for (std::size_t j = 0; j < d; ++j) next[j] += projected[r] * row[j];
    }
    const double len = norm2(next);
    if (len == 0.0)
      throw DegenerateInputError("common component: start vector annihilated");
    double change = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      next[j] /= len;
      change += (next[j] - v[j]) * (next[j] - v[j]);
    }
    v.swap(next);
    if (std::sqrt(change) < options.tolerance) break;
  }

  for (double x : v) {
    if (std::abs(x) > 1e-12) {
      if (x < 0.0)
        for (double& y : v) y = -y;
      break;
    }
  }
  return normalize(v);
}

Vector remove_common_component(std::span<const double> v,
                               std::span<const double> c) {
  if (v.size() != c.size())
    throw ValidationError("common component length " + std::to_string(c.size()) +
                          " does not match vector length " +
                          std::to_string(v.size()));
  const double proj = dot(v, c);
  Vector out(v.begin(), v.end());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] -= proj * c[j];
  return out;
}

Matrix embed_corpus(std::span<const Sentence> sentences,
                    const WordVectorTable& table,
                    const AggregationStrategy& strategy,
                    std::span<const std::size_t> fit_rows,
                    const EmbedOptions& options, Vector* fitted_component) {
  const std::size_t d = table.dim();
  const auto* sif = std::get_if<SifStrategy>(&strategy);
  if (sif && !sif->freq) throw ValidationError("SIF: no frequency table");
  if (sif && !sif->component && fit_rows.empty())
    throw ValidationError("SIF: no rows to fit the common component on");
  for (std::size_t r : fit_rows)
    if (r >= sentences.size())
      throw ValidationError("fit row " + std::to_string(r) + " out of range");

  Matrix out(sentences.size(), output_dim(strategy, d));
  internal::parallel_for(sentences.size(), options.workers, [&](std::size_t i) {
    const Sentence& tokens = sentences[i];
    Vector row;
    if (sif) {
      Sentence known;
      std::vector<Vector> vs;
      for (const auto& token : tokens) {
        auto v = table.lookup(token);
        if (v.empty()) continue;
        if (options.normalize) {
          if (dot(v, v) == 0.0) continue;
          vs.push_back(normalize(v));
        } else {
          vs.emplace_back(v.begin(), v.end());
        }
        known.push_back(token);
      }
      SifStrategy weights_only{sif->a, sif->freq, std::nullopt};
      row = sif_weighted_mean(known, vs, weights_only, d);
    } else {
      auto vs = sentence_token_vectors(table, tokens, options.normalize);
      row = std::holds_alternative<MeanMaxStrategy>(strategy)
                ? mean_max_concat(vs, d)
                : mean_pool(vs, d);
    }
    std::copy(row.begin(), row.end(), out.row(i).begin());
  });

  if (!sif) return out;

  Vector component;
  if (sif->component) {
    component = *sif->component;
  } else {
    Matrix fit(fit_rows.size(), d);
    for (std::size_t k = 0; k < fit_rows.size(); ++k) {
      auto src = out.row(fit_rows[k]);
      std::copy(src.begin(), src.end(), fit.row(k).begin());
    }
    component = fit_common_component(fit, options.power);
  }
  internal::parallel_for(out.rows(), options.workers, [&](std::size_t i) {
    Vector cleaned = remove_common_component(out.row(i), component);
    std::copy(cleaned.begin(), cleaned.end(), out.row(i).begin());
  });
  if (fitted_component) *fitted_component = std::move(component);
  return out;
}

}  // namespace sentvec
