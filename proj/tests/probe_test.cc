#include "sentvec/probe.h"

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "sentvec/metrics.h"

namespace sentvec {
namespace {

Matrix gaussian(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Matrix m(rows, cols);
  for (double& x : m.data()) x = g(rng);
  return m;
}

Matrix random_distributions(std::mt19937_64& rng, std::size_t rows, std::size_t k) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix t(rows, k);
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += t(r, c) = u(rng);
    for (std::size_t c = 0; c < k; ++c) t(r, c) /= sum;
  }
  return t;
}

// Returns the worst relative error over every parameter.
double gradient_check(Probe probe, const Matrix& x, const Matrix& targets) {
  ProbeGradient g;
  probe_loss(probe, x, targets, &g);
  const double h = 1e-5;
  double worst = 0.0;
  auto check = [&](std::vector<double>& params, const std::vector<double>& analytic) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + h;
      const double up = probe_loss(probe, x, targets);
      params[i] = saved - h;
      const double down = probe_loss(probe, x, targets);
      params[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-4});
      worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
    }
  };
  check(probe.w1.data(), g.w1.data());
  check(probe.b1, g.b1);
  check(probe.w2.data(), g.w2.data());
  check(probe.b2, g.b2);
  return worst;
}

Probe perturbed_probe(std::mt19937_64& rng, std::size_t d, std::size_t h, std::size_t k,
                      OutputKind kind) {
  Probe p = init_probe(d, h, k, kind, rng());
  std::normal_distribution<double> g(0.0, 0.3);
  for (double& b : p.b1) b = g(rng);
  for (double& b : p.b2) b = g(rng);
  return p;
}

TEST(PairFeaturesTest, Examples) {
  EXPECT_EQ(pair_features(Vector{1, 0}, Vector{0, 1}), (Vector{1, 1, 0, 0}));
  EXPECT_EQ(pair_features(Vector{2, 3}, Vector{2, 3}), (Vector{0, 0, 4, 9}));
  const Vector u{0.3, -1.5, 2}, v{-4, 0.25, 2};
  EXPECT_EQ(pair_features(u, v), pair_features(v, u));
  EXPECT_THROW(pair_features(Vector{1}, Vector{1, 2}), ValidationError);
}

TEST(ScoreDistributionTest, Examples) {
  const Vector p = score_to_distribution(3.6, 5);
  const Vector expected{0, 0, 0.4, 0.6, 0};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(p[i], expected[i], 1e-12);
  EXPECT_EQ(score_to_distribution(5, 5), (Vector{0, 0, 0, 0, 1}));
  EXPECT_EQ(score_to_distribution(1, 5), (Vector{1, 0, 0, 0, 0}));
  EXPECT_THROW(score_to_distribution(0.99, 5), ValidationError);
  EXPECT_THROW(score_to_distribution(5.01, 5), ValidationError);

  EXPECT_NEAR(distribution_to_score(Vector{0, 0, 0.4, 0.6, 0}), 3.6, 1e-12);
  EXPECT_EQ(distribution_to_score(Vector{1, 0, 0, 0, 0}), 1.0);
  EXPECT_NEAR(distribution_to_score(Vector{0.2, 0.2, 0.2, 0.2, 0.2}), 3.0, 1e-12);
  EXPECT_THROW(distribution_to_score(Vector{0.5, 0.4, 0, 0, 0}), ValidationError);
}

TEST(ScoreDistributionTest, RoundtripOnGrid) {
  for (int i = 100; i <= 500; ++i) {
    const double y = i / 100.0;
    const Vector p = score_to_distribution(y, 5);
    double sum = 0.0;
    for (double x : p) {
      EXPECT_GE(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_NEAR(distribution_to_score(p), y, 1e-12) << y;
  }
}

TEST(SoftmaxTest, ValidDistributionAndScaleInvariantArgmax) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 20.0);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vector z(2 + trial % 7);
    for (double& x : z) x = g(rng);
    const Vector p = softmax(z);
    double sum = 0.0;
    for (double x : p) {
      EXPECT_GE(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    Vector scaled = z;
    const double s = scale(rng);
    for (double& x : scaled) x *= s;
    EXPECT_EQ(argmax(scaled), argmax(z));
    EXPECT_EQ(argmax(p), argmax(z));
  }
  const Vector huge = softmax(Vector{1000, 0, -1000});
  EXPECT_NEAR(huge[0], 1.0, 1e-12);
}

TEST(ArgmaxTest, TieRule) {
  EXPECT_EQ(argmax(Vector{0.1, 2.3, 0.1}), 1u);
  EXPECT_EQ(argmax(Vector{1.0, 0.5, 1.0}), 0u);
}

TEST(PredictTest, ClassFromLogits) {
  // Zero hidden weights leave the output equal to b2.
  Probe p = init_probe(2, 3, 3, OutputKind::kClassifier, 1);
  std::fill(p.w2.data().begin(), p.w2.data().end(), 0.0);
  p.b2 = {0.1, 2.3, 0.1};
  EXPECT_EQ(predict_class(p, Vector{1, 2}), 1u);
  p.b2 = {0.7, 0.2, 0.7};
  EXPECT_EQ(predict_class(p, Vector{1, 2}), 0u);
  EXPECT_THROW(predict_class(p, Vector{1, 2, 3}), ValidationError);
  EXPECT_THROW(predict_score(p, Vector{1, 2}), ValidationError);
}

TEST(PredictTest, ScoreReadout) {
  Probe p = init_probe(2, 3, 5, OutputKind::kDistribution, 1);
  std::fill(p.w2.data().begin(), p.w2.data().end(), 0.0);
  p.b2 = {-1e9, -1e9, std::log(0.4), std::log(0.6), -1e9};
  EXPECT_NEAR(predict_score(p, Vector{0, 0}), 3.6, 1e-12);
  p.b2 = {0, 0, 0, 0, 50};
  EXPECT_NEAR(predict_score(p, Vector{0, 0}), 5.0, 1e-12);

  std::mt19937_64 rng(8);
  const Probe r = init_probe(4, 5, 5, OutputKind::kDistribution, 9);
  const Matrix x = gaussian(rng, 100, 4, 10.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double s = predict_score(r, x.row(i));
    EXPECT_GE(s, 1.0);
    EXPECT_LE(s, 5.0);
  }
}

TEST(ProbeLossTest, CrossEntropyGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> dim(1, 8), hidden(1, 5), classes(2, 5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = dim(rng), h = hidden(rng), k = classes(rng);
    const Probe p = perturbed_probe(rng, d, h, k, OutputKind::kClassifier);
    const Matrix x = gaussian(rng, 6, d);
    Matrix t(6, k);
    for (std::size_t r = 0; r < 6; ++r) t(r, rng() % k) = 1.0;
    EXPECT_LT(gradient_check(p, x, t), 1e-4) << "trial " << trial;
  }
}

TEST(ProbeLossTest, KlGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<std::size_t> dim(1, 8), hidden(1, 5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = dim(rng), h = hidden(rng);
    const Probe p = perturbed_probe(rng, d, h, 5, OutputKind::kDistribution);
    const Matrix x = gaussian(rng, 6, d);
    EXPECT_LT(gradient_check(p, x, random_distributions(rng, 6, 5)), 1e-4)
        << "trial " << trial;
  }
}

TEST(ProbeLossTest, KlIsZeroAtTarget) {
  Probe p = init_probe(1, 2, 3, OutputKind::kDistribution, 0);
  std::fill(p.w2.data().begin(), p.w2.data().end(), 0.0);
  p.b2 = {std::log(0.2), std::log(0.3), std::log(0.5)};
  Matrix x(1, 1), t(1, 3);
  t(0, 0) = 0.2;
  t(0, 1) = 0.3;
  t(0, 2) = 0.5;
  EXPECT_NEAR(probe_loss(p, x, t), 0.0, 1e-12);
}

TEST(InitProbeTest, GlorotBoundsAndSeeding) {
  const Probe p = init_probe(10, 50, 3, OutputKind::kClassifier, 4);
  const double b1 = std::sqrt(6.0 / 60.0), b2 = std::sqrt(6.0 / 53.0);
  for (double w : p.w1.data()) EXPECT_LE(std::abs(w), b1);
  for (double w : p.w2.data()) EXPECT_LE(std::abs(w), b2);
  for (double b : p.b1) EXPECT_EQ(b, 0.0);
  EXPECT_EQ(init_probe(10, 50, 3, OutputKind::kClassifier, 4).w1, p.w1);
  EXPECT_FALSE(init_probe(10, 50, 3, OutputKind::kClassifier, 5).w1 == p.w1);
}

struct Clusters {
  Matrix x;
  std::vector<std::size_t> labels;
};

Clusters two_clusters(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Clusters c{Matrix(200, 10), {}};
  for (std::size_t i = 0; i < 200; ++i) {
    const std::size_t label = i % 2;
    c.labels.push_back(label);
    for (std::size_t j = 0; j < 10; ++j) c.x(i, j) = (label ? 3.0 : -3.0) + g(rng);
  }
  return c;
}

double train_accuracy(const Probe& p, const Matrix& x, const std::vector<std::size_t>& gold) {
  std::vector<std::size_t> pred;
  for (std::size_t i = 0; i < x.rows(); ++i) pred.push_back(predict_class(p, x.row(i)));
  return accuracy<std::size_t>(pred, gold);
}

TEST(TrainClassifierTest, SeparableClusters) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Clusters c = two_clusters(seed);
    ProbeConfig cfg;
    cfg.seed = seed;
    const Probe p = train_classifier(c.x, c.labels, 2, cfg);
    EXPECT_GE(train_accuracy(p, c.x, c.labels), 0.95);
  }
}

TEST(TrainClassifierTest, ConstantFeaturesAreUninformative) {
  Matrix x(200, 10);
  std::fill(x.data().begin(), x.data().end(), 0.7);
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < 200; ++i) labels.push_back(i % 2);
  const Probe p = train_classifier(x, labels, 2, ProbeConfig{});
  EXPECT_NEAR(train_accuracy(p, x, labels), 0.5, 0.1);
}

TEST(TrainClassifierTest, Deterministic) {
  const Clusters c = two_clusters(11);
  ProbeConfig cfg;
  cfg.seed = 42;
  const Probe a = train_classifier(c.x, c.labels, 2, cfg);
  const Probe b = train_classifier(c.x, c.labels, 2, cfg);
  EXPECT_EQ(a.w1, b.w1);
  EXPECT_EQ(a.w2, b.w2);
  EXPECT_EQ(a.b2, b.b2);
  for (std::size_t i = 0; i < c.x.rows(); ++i)
    EXPECT_EQ(a.probabilities(c.x.row(i)), b.probabilities(c.x.row(i)));
}

TEST(TrainClassifierTest, Errors) {
  const Clusters c = two_clusters(1);
  EXPECT_THROW(train_classifier(c.x, c.labels, 1, ProbeConfig{}), ValidationError);
  std::vector<std::size_t> bad = c.labels;
  bad[3] = 2;
  EXPECT_THROW(train_classifier(c.x, bad, 2, ProbeConfig{}), ValidationError);
  Matrix nan = c.x;
  nan(5, 5) = std::nan("");
  EXPECT_THROW(train_classifier(nan, c.labels, 2, ProbeConfig{}), ValidationError);
  std::vector<std::size_t> short_labels(c.labels.begin(), c.labels.begin() + 10);
  EXPECT_THROW(train_classifier(c.x, short_labels, 2, ProbeConfig{}), ValidationError);
  ProbeConfig zero;
  zero.epochs = 0;
  EXPECT_THROW(train_classifier(c.x, c.labels, 2, zero), ValidationError);
}

TEST(TrainClassifierTest, FullBatchSmallStepLossIsMonotone) {
  const Clusters c = two_clusters(6);
  ProbeConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.batch_size = c.x.rows();
  cfg.epochs = 30;
  TrainingTrace trace;
  train_classifier(c.x, c.labels, 2, cfg, &trace);
  ASSERT_EQ(trace.epoch_loss.size(), 30u);
  for (std::size_t e = 1; e < trace.epoch_loss.size(); ++e)
    EXPECT_LE(trace.epoch_loss[e], trace.epoch_loss[e - 1]);
}

TEST(TrainRelatednessTest, LinearlyEncodedScores) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> score(1.0, 5.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix x(300, 6);
  std::vector<double> y;
  for (std::size_t i = 0; i < 300; ++i) {
    y.push_back(score(rng));
    x(i, 0) = (y.back() - 3.0) / 2.0;
    for (std::size_t j = 1; j < 6; ++j) x(i, j) = noise(rng);
  }
  ProbeConfig cfg;
  cfg.seed = 3;
  const Probe p = train_relatedness(x, y, 5, cfg);
  std::vector<double> pred, again;
  for (std::size_t i = 0; i < 300; ++i) pred.push_back(predict_score(p, x.row(i)));
  EXPECT_GE(pearson(pred, y), 0.95);

  const Probe q = train_relatedness(x, y, 5, cfg);
  for (std::size_t i = 0; i < 300; ++i) again.push_back(predict_score(q, x.row(i)));
  EXPECT_EQ(pred, again);
}

TEST(TrainRelatednessTest, ConstantTarget) {
  std::mt19937_64 rng(13);
  const Matrix x = gaussian(rng, 200, 5);
  const std::vector<double> y(200, 3.0);
  const Probe p = train_relatedness(x, y, 5, ProbeConfig{});
  for (std::size_t i = 0; i < x.rows(); ++i) EXPECT_NEAR(predict_score(p, x.row(i)), 3.0, 0.2);
}

TEST(TrainRelatednessTest, RejectsScoresOutOfRange) {
  Matrix x(3, 2);
  EXPECT_THROW(train_relatedness(x, std::vector<double>{1, 2, 6}, 5, ProbeConfig{}),
               ValidationError);
  EXPECT_THROW(train_relatedness(x, std::vector<double>{1, 1, 1}, 1, ProbeConfig{}),
               ValidationError);
}

TEST(ProbeIoTest, JsonRoundtripIsExact) {
  std::mt19937_64 rng(2);
  const Probe p = perturbed_probe(rng, 7, 4, 5, OutputKind::kDistribution);
  std::stringstream ss;
  save_probe(ss, p);
  const Probe q = load_probe(ss);
  EXPECT_EQ(q.kind, p.kind);
  EXPECT_EQ(q.w1, p.w1);
  EXPECT_EQ(q.b1, p.b1);
  EXPECT_EQ(q.w2, p.w2);
  EXPECT_EQ(q.b2, p.b2);
}

TEST(ProbeIoTest, RejectsMalformedFiles) {
  std::stringstream wrong_format(R"({"format":"other","version":1})");
  EXPECT_ANY_THROW(load_probe(wrong_format));
  std::stringstream bad_shape(
      R"({"format":"sentvec-probe","version":1,"kind":"classifier","activation":"tanh",
          "input_dim":2,"hidden_units":1,"outputs":2,"w1":[1],"b1":[0],"w2":[1,1],"b2":[0,0]})");
  EXPECT_ANY_THROW(load_probe(bad_shape));
}

}  // namespace
}  // namespace sentvec
