#include "sentvec/config.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sentvec {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <typename T>
T require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  return get<T>(j, key, where, T{});
}

std::size_t get_positive(const json& j, const char* key, const std::string& where,
                         std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() <= 0)
    throw ConfigError(where + "." + key + ": expected a positive integer");
  return v.get<std::size_t>();
}

std::optional<std::uint64_t> get_seed(const json& j, const char* key,
                                      const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(where + "." + key + ": expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::string resolve(const std::string& base, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute() || base.empty()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

TaskKind parse_task_kind(const std::string& s, const std::string& where) {
  if (s == "classification") return TaskKind::kClassification;
  if (s == "sick_entailment") return TaskKind::kSickEntailment;
  if (s == "sick_relatedness") return TaskKind::kSickRelatedness;
  if (s == "synthetic_classification") return TaskKind::kSyntheticClassification;
  if (s == "synthetic_relatedness") return TaskKind::kSyntheticRelatedness;
  if (s == "synthetic_entailment") return TaskKind::kSyntheticEntailment;
  throw ConfigError(where + ": unknown task kind '" + s + "'");
}

TaskSpec parse_task(const json& j, const std::string& where, const std::string& base) {
  check_keys(j, where, {"name", "kind", "path", "labels", "classes", "items",
                        "vocab_per_class", "pairs", "dim", "seed", "split_seed"});
  TaskSpec t;
  t.name = require<std::string>(j, "name", where);
  if (t.name.empty()) throw ConfigError(where + ": empty task name");
  t.kind = parse_task_kind(require<std::string>(j, "kind", where), where);
  switch (t.kind) {
    case TaskKind::kClassification:
    case TaskKind::kSickEntailment:
    case TaskKind::kSickRelatedness:
      t.path = resolve(base, require<std::string>(j, "path", where));
      if (j.contains("labels")) {
        if (t.kind != TaskKind::kClassification)
          throw ConfigError(where + ": 'labels' applies to classification tasks");
        t.labels = get<std::vector<std::string>>(j, "labels", where, {});
      }
      break;
    case TaskKind::kSyntheticClassification:
      t.classes = get_positive(j, "classes", where, 2);
      t.items = get_positive(j, "items", where, 200);
      t.vocab_per_class = get_positive(j, "vocab_per_class", where, 20);
      t.dim = get_positive(j, "dim", where, 16);
      break;
    case TaskKind::kSyntheticRelatedness:
    case TaskKind::kSyntheticEntailment:
      t.items = get_positive(j, "pairs", where, 300);
      t.dim = get_positive(j, "dim", where, 16);
      break;
  }
  t.seed = get_seed(j, "seed", where);
  t.split_seed = get_seed(j, "split_seed", where);
  return t;
}

MethodSpec parse_method(const json& j, const std::string& where, const std::string& base) {
  check_keys(j, where, {"name", "lexicon", "sentence_vectors", "strategy"});
  MethodSpec m;
  m.name = require<std::string>(j, "name", where);
  if (m.name.empty()) throw ConfigError(where + ": empty method name");
  const bool has_lex = j.contains("lexicon");
  const bool has_sv = j.contains("sentence_vectors");
  if (has_lex == has_sv)
    throw ConfigError(where + ": give exactly one of 'lexicon' and 'sentence_vectors'");
  if (has_sv) {
    m.sentence_vectors = resolve(base, require<std::string>(j, "sentence_vectors", where));
    if (j.contains("strategy"))
      throw ConfigError(where + ": 'strategy' needs a word lexicon");
    return m;
  }
  const json& lj = j.at("lexicon");
  const std::string lw = where + ".lexicon";
  check_keys(lj, lw, {"kind", "path", "dim", "seed"});
  LexiconSpec lex;
  const auto kind = require<std::string>(lj, "kind", lw);
  if (kind == "task") {
    lex.kind = LexiconSpec::Kind::kTask;
  } else if (kind == "random") {
    lex.kind = LexiconSpec::Kind::kRandom;
    lex.dim = get_positive(lj, "dim", lw, 300);
  } else if (kind == "file") {
    lex.kind = LexiconSpec::Kind::kFile;
    lex.path = resolve(base, require<std::string>(lj, "path", lw));
    if (lj.contains("dim")) lex.dim = get_positive(lj, "dim", lw, 0);
  } else {
    throw ConfigError(lw + ": unknown lexicon kind '" + kind + "'");
  }
  lex.seed = get_seed(lj, "seed", lw);
  m.lexicon = lex;

  if (j.contains("strategy")) {
    const json& sj = j.at("strategy");
    const std::string sw = where + ".strategy";
    check_keys(sj, sw, {"kind", "a", "frequencies"});
    const auto skind = require<std::string>(sj, "kind", sw);
    if (skind == "mean") {
      m.strategy.kind = StrategySpec::Kind::kMean;
    } else if (skind == "sif") {
      m.strategy.kind = StrategySpec::Kind::kSif;
      m.strategy.a = get<double>(sj, "a", sw, kDefaultSifA);
      if (!(m.strategy.a > 0.0)) throw ConfigError(sw + ".a must be positive");
      m.strategy.frequencies = resolve(base, get<std::string>(sj, "frequencies", sw, ""));
    } else if (skind == "mean_max") {
      m.strategy.kind = StrategySpec::Kind::kMeanMax;
    } else {
      throw ConfigError(sw + ": unknown strategy '" + skind + "'");
    }
    if (skind != "sif" && (sj.contains("a") || sj.contains("frequencies")))
      throw ConfigError(sw + ": 'a'/'frequencies' apply to sif only");
  }
  return m;
}

OutputFormat parse_format(std::string_view s) {
  if (s == "csv") return OutputFormat::kCsv;
  if (s == "json") return OutputFormat::kJson;
  if (s == "md" || s == "markdown") return OutputFormat::kMarkdown;
  if (s == "svg") return OutputFormat::kSvg;
  throw ConfigError("unknown output format '" + std::string(s) + "'");
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    auto item = s.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.push_back(item);
    start = comma + 1;
  }
  return out;
}

}  // namespace

const char* to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kClassification: return "classification";
    case TaskKind::kSickEntailment: return "sick_entailment";
    case TaskKind::kSickRelatedness: return "sick_relatedness";
    case TaskKind::kSyntheticClassification: return "synthetic_classification";
    case TaskKind::kSyntheticRelatedness: return "synthetic_relatedness";
    case TaskKind::kSyntheticEntailment: return "synthetic_entailment";
  }
  return "?";
}

bool is_pair_task(TaskKind kind) {
  return kind != TaskKind::kClassification &&
         kind != TaskKind::kSyntheticClassification;
}

Measure measure_of(TaskKind kind) {
  return kind == TaskKind::kSickRelatedness || kind == TaskKind::kSyntheticRelatedness
             ? Measure::kPearson
             : Measure::kAccuracy;
}

void RunConfig::validate() const {
  if (tasks.empty()) throw ConfigError("config has no tasks");
  if (methods.empty()) throw ConfigError("config has no methods");
  std::set<std::string> names;
  for (const auto& t : tasks)
    if (!names.insert(t.name).second)
      throw ConfigError("duplicate task name '" + t.name + "'");
  names.clear();
  for (const auto& m : methods)
    if (!names.insert(m.name).second)
      throw ConfigError("duplicate method name '" + m.name + "'");
  try {
    probe.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("probe: ") + e.what());
  }
  double sum = 0.0;
  for (double r : split) {
    if (!(r >= 0.0)) throw ConfigError("split ratios must be nonnegative");
    sum += r;
  }
  if (!(split[0] > 0.0) || std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("split ratios must sum to 1 with a positive train share");
  if (workers == 0) throw ConfigError("workers must be positive");
  if (formats.empty()) throw ConfigError("no output formats");
}

ProbeConfig RunConfig::effective_probe() const {
  ProbeConfig p = probe;
  if (!probe_seed_set) p.seed = seed;
  return p;
}

RunConfig parse_run_config(std::string_view json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config", {"seed", "workers", "split", "tokenizer", "normalize",
                           "probe", "tasks", "methods", "output"});
  RunConfig cfg;
  cfg.seed = get_seed(j, "seed", "config").value_or(0);
  cfg.workers = static_cast<unsigned>(get_positive(j, "workers", "config", 1));
  cfg.normalize = get<bool>(j, "normalize", "config", true);

  if (j.contains("split")) {
    const json& s = j.at("split");
    check_keys(s, "split", {"train", "dev", "test"});
    cfg.split = {get<double>(s, "train", "split", 0.0), get<double>(s, "dev", "split", 0.0),
                 get<double>(s, "test", "split", 0.0)};
  }
  if (j.contains("tokenizer")) {
    const json& t = j.at("tokenizer");
    check_keys(t, "tokenizer", {"lowercase"});
    cfg.tokenizer.lowercase = get<bool>(t, "lowercase", "tokenizer", true);
  }
  if (j.contains("probe")) {
    const json& p = j.at("probe");
    check_keys(p, "probe", {"hidden_units", "epochs", "learning_rate", "batch_size", "seed"});
    cfg.probe.hidden_units = get_positive(p, "hidden_units", "probe", cfg.probe.hidden_units);
    cfg.probe.epochs = get_positive(p, "epochs", "probe", cfg.probe.epochs);
    cfg.probe.batch_size = get_positive(p, "batch_size", "probe", cfg.probe.batch_size);
    cfg.probe.learning_rate = get<double>(p, "learning_rate", "probe", cfg.probe.learning_rate);
    if (auto s = get_seed(p, "seed", "probe")) {
      cfg.probe.seed = *s;
      cfg.probe_seed_set = true;
    }
  }
  if (!j.contains("tasks") || !j.at("tasks").is_array())
    throw ConfigError("config: 'tasks' must be an array");
  for (std::size_t i = 0; i < j.at("tasks").size(); ++i)
    cfg.tasks.push_back(parse_task(j.at("tasks")[i], "tasks[" + std::to_string(i) + "]", base_dir));
  if (!j.contains("methods") || !j.at("methods").is_array())
    throw ConfigError("config: 'methods' must be an array");
  for (std::size_t i = 0; i < j.at("methods").size(); ++i)
    cfg.methods.push_back(
        parse_method(j.at("methods")[i], "methods[" + std::to_string(i) + "]", base_dir));
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, "output", {"dir", "formats"});
    if (o.contains("dir")) cfg.output_dir = resolve(base_dir, get<std::string>(o, "dir", "output", ""));
    if (o.contains("formats")) {
      cfg.formats.clear();
      for (const auto& f : get<std::vector<std::string>>(o, "formats", "output", {}))
        cfg.formats.push_back(parse_format(f));
    }
  } else {
    cfg.output_dir = resolve(base_dir, cfg.output_dir);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), fs::path(path).parent_path().string());
}

std::vector<OutputFormat> parse_formats(std::string_view comma_list) {
  std::vector<OutputFormat> out;
  for (auto item : split_commas(comma_list)) out.push_back(parse_format(item));
  if (out.empty()) throw ConfigError("empty format list");
  return out;
}

std::vector<std::size_t> parse_dims(std::string_view comma_list) {
  std::vector<std::size_t> out;
  for (auto item : split_commas(comma_list)) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(std::string(item), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v <= 0)
      throw ConfigError("dimension '" + std::string(item) + "' is not a positive integer");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw ConfigError("no dimensions given");
  return out;
}

std::string substitute(std::string pattern, std::string_view key, std::string_view value) {
  const std::string token = "{" + std::string(key) + "}";
  for (auto pos = pattern.find(token); pos != std::string::npos;
       pos = pattern.find(token, pos + value.size()))
    pattern.replace(pos, token.size(), value);
  return pattern;
}

}  // namespace sentvec
