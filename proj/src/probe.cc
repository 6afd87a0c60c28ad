#include "sentvec/probe.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

namespace sentvec {
namespace {

using json = nlohmann::json;

struct Forward {
  Vector hidden;
  Vector logits;
};

Forward forward(const Probe& probe, std::span<const double> x) {
  const std::size_t h = probe.hidden_units();
  const std::size_t k = probe.outputs();
  Forward f{probe.b1, probe.b2};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const auto w = probe.w1.row(i);
    for (std::size_t j = 0; j < h; ++j) f.hidden[j] += xi * w[j];
  }
  for (double& a : f.hidden) a = std::tanh(a);
  for (std::size_t j = 0; j < h; ++j) {
    const auto w = probe.w2.row(j);
    for (std::size_t c = 0; c < k; ++c) f.logits[c] += f.hidden[j] * w[c];
  }
  return f;
}

Vector log_softmax(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  const double lse = m + std::log(s);
  Vector out(z.begin(), z.end());
  for (double& v : out) v -= lse;
  return out;
}

ProbeGradient zero_gradient(const Probe& probe) {
  return {Matrix(probe.w1.rows(), probe.w1.cols()), Vector(probe.b1.size(), 0.0),
          Matrix(probe.w2.rows(), probe.w2.cols()), Vector(probe.b2.size(), 0.0)};
}

// Mean loss over `rows`; accumulates the mean gradient into `gradient`.
double batch_loss(const Probe& probe, const Matrix& x, const Matrix& targets,
                  std::span<const std::size_t> rows, ProbeGradient* gradient) {
  const std::size_t h = probe.hidden_units();
  const std::size_t k = probe.outputs();
  const double scale = 1.0 / static_cast<double>(rows.size());
  double loss = 0.0;
  Vector dz(k);
  Vector dh(h);
  for (std::size_t r : rows) {
    const auto xr = x.row(r);
    const auto t = targets.row(r);
    const Forward f = forward(probe, xr);
    const Vector logp = log_softmax(f.logits);
    for (std::size_t c = 0; c < k; ++c) {
      if (t[c] <= 0.0) continue;
      loss -= t[c] * logp[c];
      if (probe.kind == OutputKind::kDistribution) loss += t[c] * std::log(t[c]);
    }
    if (!gradient) continue;

    for (std::size_t c = 0; c < k; ++c) dz[c] = (std::exp(logp[c]) - t[c]) * scale;
    for (std::size_t j = 0; j < h; ++j) {
      const auto w = probe.w2.row(j);
      auto gw = gradient->w2.row(j);
      double s = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        gw[c] += f.hidden[j] * dz[c];
        s += w[c] * dz[c];
      }
      dh[j] = s * (1.0 - f.hidden[j] * f.hidden[j]);
      gradient->b1[j] += dh[j];
    }
    for (std::size_t c = 0; c < k; ++c) gradient->b2[c] += dz[c];
    for (std::size_t i = 0; i < xr.size(); ++i) {
      const double xi = xr[i];
      if (xi == 0.0) continue;
      auto gw = gradient->w1.row(i);
      for (std::size_t j = 0; j < h; ++j) gw[j] += xi * dh[j];
    }
  }
  return loss * scale;
}

void sgd_step(Probe* probe, const ProbeGradient& g, double lr) {
  auto step = [lr](std::vector<double>& p, const std::vector<double>& d) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * d[i];
  };
  step(probe->w1.data(), g.w1.data());
  step(probe->b1, g.b1);
  step(probe->w2.data(), g.w2.data());
  step(probe->b2, g.b2);
}

void check_features(const Matrix& x, std::size_t n_targets) {
  if (x.rows() == 0) throw ValidationError("probe: no training rows");
  if (x.cols() == 0) throw ValidationError("probe: zero-width features");
  if (x.rows() != n_targets)
    throw ValidationError("probe: " + std::to_string(x.rows()) + " rows but " +
                          std::to_string(n_targets) + " targets");
  for (double v : x.data())
    if (!std::isfinite(v)) throw ValidationError("probe: non-finite feature");
}

Probe train(const Matrix& x, const Matrix& targets, OutputKind kind,
            const ProbeConfig& cfg, TrainingTrace* trace) {
  Probe probe = init_probe(x.cols(), cfg.hidden_units, targets.cols(), kind, cfg.seed);
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> all = order;
  ProbeGradient grad = zero_gradient(probe);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(epoch)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (auto* p : {&grad.w1.data(), &grad.b1, &grad.w2.data(), &grad.b2})
        std::fill(p->begin(), p->end(), 0.0);
      batch_loss(probe, x, targets,
                 std::span(order).subspan(start, end - start), &grad);
      sgd_step(&probe, grad, cfg.learning_rate);
    }
    if (trace) trace->epoch_loss.push_back(batch_loss(probe, x, targets, all, nullptr));
  }
  return probe;
}

std::vector<double> json_array(const json& j, const char* key, std::size_t n) {
  auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != n)
    throw ParseError(0, std::string("probe field '") + key + "' has " +
                            std::to_string(v.size()) + " values, expected " +
                            std::to_string(n));
  for (double x : v)
    if (!std::isfinite(x)) throw ParseError(0, "non-finite probe parameter");
  return v;
}

}  // namespace

void ProbeConfig::validate() const {
  if (hidden_units == 0) throw ValidationError("hidden_units must be positive");
  if (epochs == 0) throw ValidationError("epochs must be positive");
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ValidationError("learning_rate must be positive");
}

const char* to_string(OutputKind kind) {
  return kind == OutputKind::kClassifier ? "classifier" : "distribution";
}

Vector Probe::logits(std::span<const double> x) const {
  if (x.size() != input_dim())
    throw ValidationError("probe expects " + std::to_string(input_dim()) +
                          " features, got " + std::to_string(x.size()));
  return forward(*this, x).logits;
}

Vector Probe::probabilities(std::span<const double> x) const {
  return softmax(logits(x));
}

Probe init_probe(std::size_t input_dim, std::size_t hidden, std::size_t outputs,
                 OutputKind kind, std::uint64_t seed) {
  if (input_dim == 0 || hidden == 0 || outputs == 0)
    throw ValidationError("probe dimensions must be positive");
  std::mt19937_64 rng(seed);
  auto glorot = [&rng](Matrix* m) {
    const double limit = std::sqrt(6.0 / static_cast<double>(m->rows() + m->cols()));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (double& w : m->data()) w = u(rng);
  };
  Probe p{kind, Matrix(input_dim, hidden), Vector(hidden, 0.0),
          Matrix(hidden, outputs), Vector(outputs, 0.0)};
  glorot(&p.w1);
  glorot(&p.w2);
  return p;
}

Vector softmax(std::span<const double> logits) {
  Vector p = log_softmax(logits);
  for (double& v : p) v = std::exp(v);
  return p;
}

Vector pair_features(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw ValidationError("pair features: lengths " + std::to_string(u.size()) +
                          " and " + std::to_string(v.size()) + " differ");
  const std::size_t d = u.size();
  Vector out(2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = std::abs(u[i] - v[i]);
    out[d + i] = u[i] * v[i];
  }
  return out;
}

Vector score_to_distribution(double y, std::size_t k) {
  if (k < 1) throw ValidationError("distribution needs at least one bin");
  if (!(y >= 1.0 && y <= static_cast<double>(k)))
    throw ValidationError("score " + std::to_string(y) + " outside [1, " +
                          std::to_string(k) + "]");
  Vector p(k, 0.0);
  const double lower = std::floor(y);
  const auto i = static_cast<std::size_t>(lower);  // 1-based bin
  if (i == k) {
    p[k - 1] = 1.0;
    return p;
  }
  p[i - 1] = lower - y + 1.0;
  p[i] = y - lower;
  return p;
}

double distribution_to_score(std::span<const double> p) {
  if (p.empty()) throw ValidationError("empty distribution");
  double total = 0.0;
  double score = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    total += p[i];
    score += static_cast<double>(i + 1) * p[i];
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw ValidationError("distribution sums to " + std::to_string(total));
  return score;
}

double probe_loss(const Probe& probe, const Matrix& x, const Matrix& targets,
                  ProbeGradient* gradient) {
  if (x.rows() != targets.rows() || targets.cols() != probe.outputs() ||
      x.cols() != probe.input_dim())
    throw ValidationError("probe_loss: shape mismatch");
  if (x.rows() == 0) throw ValidationError("probe_loss: no rows");
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), 0);
  if (gradient) *gradient = zero_gradient(probe);
  return batch_loss(probe, x, targets, rows, gradient);
}

Probe train_classifier(const Matrix& x, std::span<const std::size_t> labels,
                       std::size_t k, const ProbeConfig& cfg,
                       TrainingTrace* trace) {
  cfg.validate();
  if (k < 2) throw ValidationError("classifier needs at least 2 classes");
  check_features(x, labels.size());
  Matrix targets(x.rows(), k);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] >= k)
      throw ValidationError("label " + std::to_string(labels[r]) +
                            " outside [0, " + std::to_string(k) + ")");
    targets(r, labels[r]) = 1.0;
  }
  return train(x, targets, OutputKind::kClassifier, cfg, trace);
}

Probe train_relatedness(const Matrix& x, std::span<const double> scores,
                        std::size_t k, const ProbeConfig& cfg,
                        TrainingTrace* trace) {
  cfg.validate();
  if (k < 2) throw ValidationError("relatedness needs at least 2 bins");
  check_features(x, scores.size());
  Matrix targets(x.rows(), k);
  for (std::size_t r = 0; r < scores.size(); ++r) {
    const Vector t = score_to_distribution(scores[r], k);
    std::copy(t.begin(), t.end(), targets.row(r).begin());
  }
  return train(x, targets, OutputKind::kDistribution, cfg, trace);
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ValidationError("argmax of an empty sequence");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

std::size_t predict_class(const Probe& probe, std::span<const double> x) {
  // softmax is monotone, so the logits decide.
  return argmax(probe.logits(x));
}

double predict_score(const Probe& probe, std::span<const double> x) {
  if (probe.kind != OutputKind::kDistribution)
    throw ValidationError("predict_score needs a distribution probe");
  const double k = static_cast<double>(probe.outputs());
  return std::clamp(distribution_to_score(probe.probabilities(x)), 1.0, k);
}

void save_probe(std::ostream& out, const Probe& probe) {
  json j;
  j["format"] = "sentvec-probe";
  j["version"] = 1;
  j["kind"] = to_string(probe.kind);
  j["activation"] = "tanh";
  j["input_dim"] = probe.input_dim();
  j["hidden_units"] = probe.hidden_units();
  j["outputs"] = probe.outputs();
  j["w1"] = probe.w1.data();
  j["b1"] = probe.b1;
  j["w2"] = probe.w2.data();
  j["b2"] = probe.b2;
  out << j.dump() << '\n';
}

Probe load_probe(std::istream& in) {
  json j;
  try {
    in >> j;
    if (j.at("format") != "sentvec-probe" || j.at("version") != 1)
      throw ParseError(0, "not a version 1 sentvec probe");
    if (j.at("activation") != "tanh")
      throw ParseError(0, "unsupported activation");
    const auto kind_name = j.at("kind").get<std::string>();
    if (kind_name != "classifier" && kind_name != "distribution")
      throw ParseError(0, "unknown probe kind '" + kind_name + "'");
    const auto in_dim = j.at("input_dim").get<std::size_t>();
    const auto hidden = j.at("hidden_units").get<std::size_t>();
    const auto outputs = j.at("outputs").get<std::size_t>();
    if (in_dim == 0 || hidden == 0 || outputs == 0)
      throw ParseError(0, "probe dimensions must be positive");
    Probe p;
    p.kind = kind_name == "classifier" ? OutputKind::kClassifier
                                       : OutputKind::kDistribution;
    p.w1 = Matrix(in_dim, hidden);
    p.w1.data() = json_array(j, "w1", in_dim * hidden);
    p.b1 = json_array(j, "b1", hidden);
    p.w2 = Matrix(hidden, outputs);
    p.w2.data() = json_array(j, "w2", hidden * outputs);
    p.b2 = json_array(j, "b2", outputs);
    return p;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed probe file: ") + e.what());
  }
}

}  // namespace sentvec
