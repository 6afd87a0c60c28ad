// One line per acceptance criterion; exit status is non-zero if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "sentvec/aggregate.h"
#include "sentvec/metrics.h"
#include "sentvec/probe.h"
#include "sentvec/render.h"
#include "sentvec/runner.h"

namespace {

using namespace sentvec;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  double time_limit_s;  // 0: none
  std::function<Outcome()> check;
};

// Collects failed sub-checks; the first few become the detail line.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_++ < 3) detail_ += (detail_.empty() ? "" : "; ") + what;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : ", ") + s; }
  Outcome outcome() const {
    if (failures_ == 0) return {true, notes_};
    return {false, detail_ + (failures_ > 3 ? " (+" + std::to_string(failures_ - 3) + " more)" : "") +
                       (notes_.empty() ? "" : " [" + notes_ + "]")};
  }

 private:
  int failures_ = 0;
  std::string detail_, notes_;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& x : m.data()) x = g(rng);
  return m;
}

Vector eigen_top(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) e(r, c) = m(r, c);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(e.transpose() * e);
  const Eigen::VectorXd v = s.eigenvectors().col(m.cols() - 1);
  return Vector(v.data(), v.data() + v.size());
}

Outcome aggregation_oracle() {
  Checks c;
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> size(1, 8);
  double worst = 1.0, worst_orth = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Matrix m = random_matrix(rng, size(rng), size(rng));
    const Vector comp = fit_common_component(m);
    worst = std::min(worst, std::abs(dot(comp, eigen_top(m))));
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const Vector row(m.row(r).begin(), m.row(r).end());
      worst_orth = std::max(worst_orth, std::abs(dot(remove_common_component(row, comp), comp)));
    }
    std::vector<Vector> vs;
    for (std::size_t r = 0; r < m.rows(); ++r) vs.emplace_back(m.row(r).begin(), m.row(r).end());
    Vector parts = mean_pool(vs, m.cols());
    const Vector mx = max_pool(vs, m.cols());
    parts.insert(parts.end(), mx.begin(), mx.end());
    c.expect(mean_max_concat(vs, m.cols()) == parts, "mean_max_concat differs from its parts");
  }
  c.expect(worst >= 1.0 - 1e-6, "min |dot| with oracle " + fmt(worst, 9));
  c.expect(worst_orth <= 1e-9, "orthogonality residual " + std::to_string(worst_orth));
  c.note("min |dot| " + fmt(worst, 9));
  return c.outcome();
}

Outcome sif_formula() {
  Checks c;
  for (double a : {1e-4, 1e-3, 0.01, 0.3}) {
    c.expect(sif_weight(a, 0.0) == 1.0, "sif_weight(a,0) != 1");
    c.expect(sif_weight(a, a) == 0.5, "sif_weight(a,a) != 0.5");
  }
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    auto freq = std::make_shared<FrequencyTable>();
    const std::vector<std::string> words{"a", "b", "c", "d"};
    for (const auto& w : words) freq->counts[w] = 3;
    freq->total = 40;
    const SifStrategy s{1e-3, freq, std::nullopt};
    Sentence tokens;
    std::vector<Vector> vs;
    for (int k = 0; k < 1 + trial % 7; ++k) {
      tokens.push_back(words[rng() % 4]);
      Vector v(5);
      for (double& x : v) x = g(rng);
      vs.push_back(v);
    }
    const Vector sif = sif_weighted_mean(tokens, vs, s, 5);
    const Vector mean = mean_pool(vs, 5);
    const double w = sif_weight(1e-3, 3.0 / 40.0);
    for (std::size_t j = 0; j < 5; ++j) worst = std::max(worst, std::abs(sif[j] - w * mean[j]));
  }
  c.expect(worst <= 1e-12, "uniform-probability deviation " + std::to_string(worst));

  WordVectorTable t(4);
  t.insert("x", Vector{1, -2, 0.5, 3});
  t.insert("y", Vector{-2, 4, -1, -6});
  t.insert("z", Vector{3, -6, 1.5, 9});
  const std::vector<Sentence> corpus{{"x"}, {"y", "x"}, {"z", "z", "y"}, {"x", "y", "z"}, {"z"}};
  auto freq = std::make_shared<FrequencyTable>();
  freq->counts = {{"x", 5}, {"y", 2}, {"z", 9}};
  freq->total = 16;
  const std::vector<std::size_t> all{0, 1, 2, 3, 4};
  const Matrix m = embed_corpus(corpus, t, SifStrategy{1e-3, freq, std::nullopt}, all);
  double max_entry = 0.0;
  for (double x : m.data()) max_entry = std::max(max_entry, std::abs(x));
  c.expect(max_entry < 1e-9, "rank-1 residual " + std::to_string(max_entry));
  c.note("rank-1 max |entry| " + fmt(max_entry, 17));
  return c.outcome();
}

double gradient_error(Probe probe, const Matrix& x, const Matrix& t) {
  ProbeGradient g;
  probe_loss(probe, x, t, &g);
  const double h = 1e-5;
  double worst = 0.0;
  auto check = [&](std::vector<double>& params, const std::vector<double>& analytic) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + h;
      const double up = probe_loss(probe, x, t);
      params[i] = saved - h;
      const double down = probe_loss(probe, x, t);
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

Outcome probe_numerics() {
  Checks c;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> dim(1, 8), hidden(1, 5), classes(2, 5);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  double worst_ce = 0.0, worst_kl = 0.0;
  for (int net = 0; net < 20; ++net) {
    for (OutputKind kind : {OutputKind::kClassifier, OutputKind::kDistribution}) {
      const std::size_t d = dim(rng), h = hidden(rng);
      const std::size_t k = kind == OutputKind::kClassifier ? classes(rng) : 5;
      const Probe p = init_probe(d, h, k, kind, rng());
      const Matrix x = random_matrix(rng, 5, d);
      Matrix t(5, k);
      for (std::size_t r = 0; r < 5; ++r) {
        if (kind == OutputKind::kClassifier) {
          t(r, rng() % k) = 1.0;
        } else {
          double sum = 0.0;
          for (std::size_t j = 0; j < k; ++j) sum += t(r, j) = u(rng);
          for (std::size_t j = 0; j < k; ++j) t(r, j) /= sum;
        }
      }
      const double err = gradient_error(p, x, t);
      (kind == OutputKind::kClassifier ? worst_ce : worst_kl) =
          std::max(kind == OutputKind::kClassifier ? worst_ce : worst_kl, err);
    }
  }
  c.expect(worst_ce < 1e-4, "cross-entropy gradient error " + std::to_string(worst_ce));
  c.expect(worst_kl < 1e-4, "KL gradient error " + std::to_string(worst_kl));
  double worst_rt = 0.0;
  for (int i = 100; i <= 500; ++i) {
    const double y = i / 100.0;
    worst_rt = std::max(worst_rt, std::abs(distribution_to_score(score_to_distribution(y, 5)) - y));
  }
  c.expect(worst_rt <= 1e-12, "roundtrip error " + std::to_string(worst_rt));
  char buf[128];
  std::snprintf(buf, sizeof buf, "max rel. error CE %.1e, KL %.1e; roundtrip %.1e", worst_ce,
                worst_kl, worst_rt);
  c.note(buf);
  return c.outcome();
}

RunConfig seeded_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.seed = seed;
  return cfg;
}

ResolvedMethod mean_method(std::shared_ptr<const WordVectorTable> lex, const std::string& name) {
  return ResolvedMethod{name, std::move(lex), nullptr, MeanStrategy{}};
}

Outcome synthetic_classification_e2e() {
  Checks c;
  const RunConfig cfg = seeded_config(3);
  TaskSpec spec;
  spec.name = "synthetic-classification";
  spec.kind = TaskKind::kSyntheticClassification;
  spec.classes = 2;
  spec.items = 200;
  spec.vocab_per_class = 20;
  spec.seed = 3;
  const LoadedTask task = load_task(spec, cfg);
  const ProbeConfig probe = cfg.effective_probe();

  const double clustered = run_task(task, mean_method(task.builtin_lexicon, "Mean"), probe).value;
  MethodSpec random_spec;
  random_spec.name = "Random";
  random_spec.lexicon = LexiconSpec{LexiconSpec::Kind::kRandom, "", spec.dim, std::nullopt};
  ResourceCache cache;
  const double random =
      run_task(task, resolve_method(random_spec, task, cfg, cache), probe).value;
  std::vector<std::size_t> gold;
  for (auto i : task.splits().test) gold.push_back(task.classification->items[i].label);
  const double majority = majority_baseline<std::size_t>(gold);

  c.expect(clustered >= 0.95, "clustered accuracy " + fmt(clustered) + " < 0.95");
  c.expect(std::abs(random - majority) <= 0.1,
           "random baseline " + fmt(random) + " not within 0.1 of majority " + fmt(majority));
  c.note("mean " + fmt(clustered) + ", random " + fmt(random) + ", majority " + fmt(majority));
  return c.outcome();
}

Outcome synthetic_relatedness_e2e() {
  Checks c;
  const RunConfig cfg = seeded_config(5);
  TaskSpec spec;
  spec.name = "synthetic-relatedness";
  spec.kind = TaskKind::kSyntheticRelatedness;
  spec.items = 300;
  spec.dim = 16;
  spec.seed = 5;
  const LoadedTask task = load_task(spec, cfg);
  const EvalResult r =
      run_task(task, mean_method(task.builtin_lexicon, "Mean"), cfg.effective_probe());
  c.expect(r.measure == Measure::kPearson, "measure is not pearson");
  c.expect(r.value >= 0.8, "pearson " + fmt(r.value) + " < 0.8");

  bool rejected = false;
  try {
    const std::vector<double> constant(10, 3.0), gold{1, 2, 3, 4, 5, 1, 2, 3, 4, 5};
    pearson(constant, gold);
  } catch (const DegenerateInputError&) {
    rejected = true;
  }
  c.expect(rejected, "constant predictions were scored by pearson");

  // A lexicon of zero vectors makes every pair identical, so the probe can
  // only emit one score.
  auto zeros = std::make_shared<WordVectorTable>(16);
  for (const auto& w : task.vocabulary()) zeros->insert(w, Vector(16, 0.0));
  bool end_to_end_rejected = false;
  try {
    run_task(task, mean_method(zeros, "Zero"), cfg.effective_probe());
  } catch (const DegenerateInputError&) {
    end_to_end_rejected = true;
  }
  c.expect(end_to_end_rejected, "constant-prediction run was scored");
  c.note("pearson " + fmt(r.value));
  return c.outcome();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + SENTVEC_CLI + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  Checks c;
  const std::string config = std::string(SENTVEC_SOURCE_DIR) + "/configs/synthetic.json";
  const fs::path dir = fs::temp_directory_path() / ("sentvec_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  std::vector<std::string> csvs;
  for (const auto& [name, workers] : std::vector<std::pair<std::string, int>>{
           {"a1", 1}, {"b1", 1}, {"a4", 4}, {"b4", 4}}) {
    const fs::path out = dir / name;
    const int code = run_cli("eval --config '" + config + "' --workers " +
                             std::to_string(workers) + " --out '" + out.string() + "'");
    c.expect(code == 0, "eval exited with " + std::to_string(code));
    csvs.push_back(read_file(out / "results.csv"));
  }
  c.expect(!csvs[0].empty(), "results.csv is empty");
  c.expect(csvs[0] == csvs[1], "two runs at 1 worker differ");
  c.expect(csvs[0] == csvs[2] && csvs[2] == csvs[3], "4 workers differ from 1 worker");
  fs::remove_all(dir);
  c.note("4 runs, " + std::to_string(csvs[0].size()) + " identical bytes");
  return c.outcome();
}

Outcome dimension_trend() {
  Checks c;
  const RunConfig cfg = parse_run_config(R"({
    "seed": 3,
    "tasks": [{"name": "synthetic-classification", "kind": "synthetic_classification",
               "classes": 2, "items": 200, "vocab_per_class": 20, "seed": 3}],
    "methods": [
      {"name": "Mean", "lexicon": {"kind": "task"}, "strategy": {"kind": "mean"}},
      {"name": "SIF", "lexicon": {"kind": "task"}, "strategy": {"kind": "sif", "a": 0.1}},
      {"name": "Mean+Max", "lexicon": {"kind": "task"}, "strategy": {"kind": "mean_max"}}
    ]
  })", ".");
  const std::vector<std::size_t> dims{4, 16, 64};
  const SweepResult s = dim_sweep(cfg, dims);
  const double at4 = s.matrices.front().at(0, 0).value;
  const double at64 = s.matrices.back().at(0, 0).value;
  c.expect(at64 >= at4, "mean accuracy at dim 64 (" + fmt(at64) + ") < dim 4 (" + fmt(at4) + ")");

  ResourceCache cache;
  for (std::size_t d : dims) {
    const LoadedTask task = load_task(cfg.tasks[0], cfg, d);
    const ResolvedMethod m = resolve_method(cfg.methods[2], task, cfg, cache, d);
    const Matrix x = embed_task(task, m, cfg.normalize);
    c.expect(x.cols() == 2 * d, "mean||max width " + std::to_string(x.cols()) + " at dim " +
                                    std::to_string(d));
  }
  std::string series;
  for (std::size_t i = 0; i < dims.size(); ++i)
    series += (i ? " " : "") + std::to_string(dims[i]) + ":" + fmt(s.matrices[i].at(0, 0).value, 3);
  c.note("mean accuracy " + series);
  return c.outcome();
}

// Runs only when a user points SENTVEC_ASSETS_CONFIG at a configuration over
// real word vectors and datasets.
Outcome conditional_reproduction(bool* skipped) {
  Checks c;
  const char* path = std::getenv("SENTVEC_ASSETS_CONFIG");
  if (path == nullptr || *path == '\0') {
    *skipped = true;
    return {true, "set SENTVEC_ASSETS_CONFIG to a config over user-supplied assets"};
  }
  const RunConfig cfg = load_run_config(path);
  validate_run(cfg);
  const RunOutput out = run_matrix(cfg);
  const ResultMatrix& m = out.matrix;
  c.expect(m.cells.size() == m.methods.size() * m.tasks.size(), "incomplete matrix");
  for (const auto& cell : m.cells) {
    try {
      cell.validate();
    } catch (const std::exception& e) {
      c.expect(false, e.what());
    }
  }
  std::cout << render_markdown(m);
  c.note(std::to_string(m.methods.size()) + "x" + std::to_string(m.tasks.size()) + " matrix");
  return c.outcome();
}

}  // namespace

int main() {
  bool ac8_skipped = false;
  const std::vector<Criterion> criteria{
      {"AC1", "aggregation oracle suite", 5.0, aggregation_oracle},
      {"AC2", "SIF formula suite", 0.0, sif_formula},
      {"AC3", "probe numerical suite", 0.0, probe_numerics},
      {"AC4", "end-to-end synthetic classification", 30.0, synthetic_classification_e2e},
      {"AC5", "end-to-end synthetic relatedness", 30.0, synthetic_relatedness_e2e},
      {"AC6", "determinism across runs and worker counts", 0.0, determinism},
      {"AC7", "dimension sweep trend and mean||max width", 0.0, dimension_trend},
      {"AC8", "conditional reproduction on user assets", 0.0,
       [&] { return conditional_reproduction(&ac8_skipped); }},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.pass && cr.time_limit_s > 0 && secs >= cr.time_limit_s) {
      o.pass = false;
      o.detail += " (exceeded " + fmt(cr.time_limit_s, 0) + " s)";
    }
    const char* tag = !o.pass ? "[FAIL]" : (cr.id == "AC8" && ac8_skipped) ? "[SKIP]" : "[PASS]";
    std::cout << tag << ' ' << cr.id << ' ' << cr.title << " (" << fmt(secs, 2) << " s)";
    if (!o.detail.empty()) std::cout << ": " << o.detail;
    std::cout << std::endl;
    failed += !o.pass;
  }
  std::cout << (failed ? std::to_string(failed) + " criterion(s) failed" : "all criteria met")
            << std::endl;
  return failed ? 1 : 0;
}
