#ifndef SENTVEC_PROBE_H_
#define SENTVEC_PROBE_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sentvec/common.h"

namespace sentvec {

struct ProbeConfig {
  std::size_t hidden_units = 50;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  double learning_rate = 0.5;
  std::size_t batch_size = 64;

  void validate() const;
};

enum class OutputKind { kClassifier, kDistribution };

const char* to_string(OutputKind kind);

// input -> tanh hidden layer -> softmax output.
struct Probe {
  OutputKind kind = OutputKind::kClassifier;
  Matrix w1;  // input_dim x hidden
  Vector b1;
  Matrix w2;  // hidden x outputs
  Vector b2;

  std::size_t input_dim() const { return w1.rows(); }
  std::size_t hidden_units() const { return w1.cols(); }
  std::size_t outputs() const { return w2.cols(); }

  Vector logits(std::span<const double> x) const;
  Vector probabilities(std::span<const double> x) const;
};

// Glorot-uniform weights and zero biases, seeded.
Probe init_probe(std::size_t input_dim, std::size_t hidden, std::size_t outputs,
                 OutputKind kind, std::uint64_t seed);

Vector softmax(std::span<const double> logits);

// |u - v| followed by u * v (componentwise), length 2d.
Vector pair_features(std::span<const double> u, std::span<const double> v);

// Spreads y in [1, K] over bins floor(y) and floor(y) + 1 so that the
// expected bin index (1-based) equals y.
Vector score_to_distribution(double y, std::size_t k);
// sum_i i * p_i with 1-based i. Throws ValidationError unless sum(p) = 1
// within 1e-6.
double distribution_to_score(std::span<const double> p);

struct ProbeGradient {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

// Mean over rows of the loss against target distributions (one-hot rows for
// classification). kClassifier uses cross-entropy, kDistribution uses
// KL(target || predicted). Both share the logit gradient p - t. Fills
// `gradient` when non-null.
double probe_loss(const Probe& probe, const Matrix& x, const Matrix& targets,
                  ProbeGradient* gradient = nullptr);

// Mean full-data loss after each epoch.
struct TrainingTrace {
  std::vector<double> epoch_loss;
};

// Mini-batch SGD for exactly cfg.epochs passes. Deterministic given the
// inputs and cfg.seed.
Probe train_classifier(const Matrix& x, std::span<const std::size_t> labels,
                       std::size_t k, const ProbeConfig& cfg,
                       TrainingTrace* trace = nullptr);
Probe train_relatedness(const Matrix& x, std::span<const double> scores,
                        std::size_t k, const ProbeConfig& cfg,
                        TrainingTrace* trace = nullptr);

// Argmax of the output, lowest index on ties.
std::size_t predict_class(const Probe& probe, std::span<const double> x);
std::size_t argmax(std::span<const double> values);
// Expected score under the predicted distribution, in [1, K].
double predict_score(const Probe& probe, std::span<const double> x);

// JSON: {"format": "sentvec-probe", "version": 1, "kind", "activation",
// "input_dim", "hidden_units", "outputs", "w1", "b1", "w2", "b2"} with
// row-major parameter arrays.
void save_probe(std::ostream& out, const Probe& probe);
Probe load_probe(std::istream& in);

}  // namespace sentvec

#endif  // SENTVEC_PROBE_H_
