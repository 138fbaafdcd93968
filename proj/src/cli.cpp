// Copyright 2026 The fairgm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "fairgm/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "fairgm/util.hpp"
#include "json.hpp"

namespace fairgm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorCode::kConfigError, message);
}

void check_keys(const json& j, std::string_view where,
                std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) config_error(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

AttentionModel parse_attention(const json& j) {
  check_keys(j, "attention", {"model", "patience", "cutoff"});
  const std::string model = j.value("model", std::string("geometric"));
  std::optional<std::size_t> cutoff;
  if (j.contains("cutoff") && !j["cutoff"].is_null()) {
    cutoff = j["cutoff"].get<std::size_t>();
  }
  if (model == "geometric") {
    return AttentionModel::geometric(j.value("patience", 0.5), cutoff);
  }
  if (model == "log") return AttentionModel::log_discount(cutoff);
  if (model == "uniform") {
    if (!cutoff) config_error("uniform attention needs a cutoff");
    return AttentionModel::uniform(*cutoff);
  }
  config_error("unknown attention model '" + model + "'");
}

SchemePtr parse_scheme_json(const json& j) {
  check_keys(j, "scheme", {"name", "groups", "unknown"});
  auto labels = j.at("groups").get<std::vector<std::string>>();
  std::optional<std::size_t> unknown;
  if (j.contains("unknown") && !j["unknown"].is_null()) {
    const auto label = j["unknown"].get<std::string>();
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
      config_error("unknown label '" + label + "' is not a group");
    }
    unknown = static_cast<std::size_t>(it - labels.begin());
  }
  return make_scheme(j.at("name").get<std::string>(), std::move(labels),
                     unknown);
}

void set_target(ExperimentConfig& config, const std::string& value,
                const fs::path& base) {
  if (value == "qrels") {
    config.evaluation.target = TargetMode::kQrels;
    config.target_file.reset();
  } else if (value == "uniform") {
    config.evaluation.target = TargetMode::kUniform;
    config.target_file.reset();
  } else {
    config.evaluation.target = TargetMode::kFixed;
    config.target_file = resolve(base, value);
  }
}

struct SectionSeeds {
  std::optional<std::uint64_t> testbed;
  std::optional<std::uint64_t> sweep;
  std::optional<std::uint64_t> sample;
};

}  // namespace

SchemePtr parse_scheme_declaration(std::string_view text,
                                   std::string_view unknown_label) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    config_error("scheme declaration '" + std::string(text) +
                 "' must look like name:label,label,...");
  }
  std::vector<std::string> labels;
  std::optional<std::size_t> unknown;
  for (auto label : split(text.substr(colon + 1), ',')) {
    if (label == unknown_label) unknown = labels.size();
    labels.emplace_back(label);
  }
  return make_scheme(std::string(text.substr(0, colon)), std::move(labels),
                     unknown);
}

std::map<std::string, std::vector<double>> parse_target_file(
    std::string_view json_text, std::span<const SchemePtr> schemes) {
  std::map<std::string, std::vector<double>> out;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    config_error(std::string("malformed target file: ") + e.what());
  }
  if (!j.is_object()) config_error("target file must be a JSON object");
  for (const auto& [name, value] : j.items()) {
    if (value.is_array()) {
      out[name] = value.get<std::vector<double>>();
      continue;
    }
    const SchemePtr* scheme = nullptr;
    for (const auto& s : schemes) {
      if (s->name() == name) scheme = &s;
    }
    if (!scheme || !value.is_object()) {
      config_error("target for '" + name +
                   "' must be an array or a label map of a declared scheme");
    }
    std::vector<double> weights((*scheme)->size(), 0.0);
    for (const auto& [label, w] : value.items()) {
      const auto idx = (*scheme)->index_of(label);
      if (!idx) {
        throw Error(ErrorCode::kUnknownLabel,
                    "label '" + label + "' in target for '" + name + "'");
      }
      weights[*idx] = w.get<double>();
    }
    out[name] = std::move(weights);
  }
  return out;
}

ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const fs::path& base_dir) {
  ExperimentConfig config;
  SectionSeeds seeds;
  try {
    const json j = json::parse(json_text);
    check_keys(j, "config",
               {"runs", "qrels", "annotations", "annotations_b", "reports_a",
                "reports_b", "rates", "annotation_format", "schemes",
                "evaluate_schemes", "attention", "divergence", "target",
                "relevance", "corpus_target", "exclude_unknown", "fallback",
                "overall", "complement", "expected_exposure",
                "sequence_separator", "alpha", "exclude_missing", "testbed",
                "sweep", "sample", "seed", "threads", "out"});
    if (j.contains("runs")) {
      for (const auto& r : j["runs"]) {
        config.runs.push_back(resolve(base_dir, r.get<std::string>()));
      }
    }
    auto path_field = [&](const char* key, std::optional<fs::path>& dst) {
      if (j.contains(key) && !j[key].is_null()) {
        dst = resolve(base_dir, j[key].get<std::string>());
      }
    };
    path_field("qrels", config.qrels);
    path_field("annotations", config.annotations);
    path_field("annotations_b", config.annotations_b);
    path_field("reports_a", config.reports_a);
    path_field("reports_b", config.reports_b);
    path_field("rates", config.rates);
    if (j.contains("annotation_format")) {
      config.annotation_format =
          parse_annotation_format(j["annotation_format"].get<std::string>());
    }
    if (j.contains("schemes")) {
      for (const auto& s : j["schemes"]) {
        config.schemes.push_back(parse_scheme_json(s));
      }
    }
    if (j.contains("evaluate_schemes")) {
      config.evaluate_schemes =
          j["evaluate_schemes"].get<std::vector<std::string>>();
    }
    auto& ev = config.evaluation;
    if (j.contains("attention")) ev.attention = parse_attention(j["attention"]);
    if (j.contains("divergence")) {
      ev.divergence = parse_divergence(j["divergence"].get<std::string>());
    }
    if (j.contains("target")) {
      set_target(config, j["target"].get<std::string>(), base_dir);
    }
    if (j.contains("relevance")) {
      ev.relevance = parse_relevance_mode(j["relevance"].get<std::string>());
    }
    ev.corpus_target = j.value("corpus_target", ev.corpus_target);
    ev.exclude_unknown = j.value("exclude_unknown", ev.exclude_unknown);
    if (j.contains("fallback")) {
      ev.fallback = parse_missing_policy(j["fallback"].get<std::string>());
    }
    ev.overall = j.value("overall", ev.overall);
    ev.complement = j.value("complement", ev.complement);
    ev.expected_exposure = j.value("expected_exposure", ev.expected_exposure);
    if (j.contains("sequence_separator") && !j["sequence_separator"].is_null()) {
      const auto sep = j["sequence_separator"].get<std::string>();
      if (sep.size() != 1) config_error("sequence_separator must be one character");
      ev.sequence_separator = sep[0];
    }
    config.correlation.alpha = j.value("alpha", config.correlation.alpha);
    config.correlation.exclude_missing =
        j.value("exclude_missing", config.correlation.exclude_missing);
    config.seed = j.value("seed", config.seed);
    config.threads = j.value("threads", config.threads);
    if (j.contains("out")) config.out = resolve(base_dir, j["out"].get<std::string>());

    if (j.contains("testbed")) {
      const auto& t = j["testbed"];
      check_keys(t, "testbed",
                 {"queries", "docs_per_query", "groups", "systems", "spread",
                  "grade_distribution", "seed"});
      auto& tb = config.testbed;
      tb.queries = t.value("queries", tb.queries);
      tb.docs_per_query = t.value("docs_per_query", tb.docs_per_query);
      tb.groups = t.value("groups", tb.groups);
      tb.systems = t.value("systems", tb.systems);
      tb.spread = t.value("spread", tb.spread);
      tb.grade_distribution =
          t.value("grade_distribution", tb.grade_distribution);
      if (t.contains("seed")) seeds.testbed = t["seed"].get<std::uint64_t>();
    }
    if (j.contains("sweep")) {
      const auto& s = j["sweep"];
      check_keys(s, "sweep",
                 {"levels", "trials", "mode", "style", "scheme", "seed"});
      auto& sw = config.sweep;
      sw.levels = s.value("levels", sw.levels);
      sw.trials = s.value("trials", sw.trials);
      if (s.contains("mode")) {
        sw.mode = parse_corruption_mode(s["mode"].get<std::string>());
      }
      if (s.contains("style")) {
        sw.style = parse_confusion_style(s["style"].get<std::string>());
      }
      sw.scheme = s.value("scheme", sw.scheme);
      if (s.contains("seed")) seeds.sweep = s["seed"].get<std::uint64_t>();
    }
    if (j.contains("sample")) {
      const auto& s = j["sample"];
      check_keys(s, "sample", {"scheme", "train", "test", "seed"});
      config.sample.scheme = s.value("scheme", config.sample.scheme);
      config.sample.train_per_group =
          s.value("train", config.sample.train_per_group);
      config.sample.test_per_group = s.value("test", config.sample.test_per_group);
      if (s.contains("seed")) seeds.sample = s["seed"].get<std::uint64_t>();
    }
  } catch (const json::exception& e) {
    config_error(std::string("malformed config: ") + e.what());
  }
  config.testbed.seed = seeds.testbed.value_or(config.seed);
  config.sweep.seed = seeds.sweep.value_or(config.seed);
  config.sample.seed = seeds.sample.value_or(config.seed);
  return config;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  if (!fs::exists(path)) {
    config_error("config file '" + path.string() + "' does not exist");
  }
  return parse_experiment_config(read_file(path), path.parent_path());
}

void OutputSet::add(std::string name, std::string content) {
  files_[std::move(name)] = std::move(content);
}

void OutputSet::commit(const fs::path& dir) const {
  std::vector<fs::path> written;
  try {
    fs::create_directories(dir);
    for (const auto& [name, content] : files_) {
      const fs::path target = dir / name;
      const fs::path temp = dir / (name + ".tmp");
      written.push_back(temp);
      {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) {
          throw Error(ErrorCode::kIoError, "cannot write '" + temp.string() + "'");
        }
        out << content;
        if (!out.flush()) {
          throw Error(ErrorCode::kIoError, "cannot write '" + temp.string() + "'");
        }
      }
      fs::rename(temp, target);
      written.back() = target;
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
}

namespace {

// Flags shared by every command. Unset values leave the config untouched.
struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string divergence;
  std::optional<double> patience;
  std::string attention;
  std::optional<std::size_t> cutoff;
  std::string target;
  bool json = false;
  std::optional<unsigned> threads;

  std::vector<std::string> runs;
  std::string qrels;
  std::string annotations;
  std::string annotations_b;
  std::string reports_a;
  std::string reports_b;
  std::string format;
  std::vector<std::string> scheme_defs;
  std::string unknown_label = "unknown";
  std::vector<std::string> schemes;
  std::string relevance;
  std::string fallback;
  bool complement = false;
  bool expected_exposure = false;
  bool no_overall = false;
  bool exclude_missing = false;
  std::optional<double> alpha;

  // sweep / testbed
  std::string levels;
  std::optional<std::size_t> trials;
  std::string mode;
  std::string style;
  std::optional<std::size_t> queries;
  std::optional<std::size_t> docs;
  std::optional<std::size_t> groups;
  std::optional<std::size_t> systems;
  std::optional<double> spread;

  // sample
  std::optional<std::size_t> train;
  std::optional<std::size_t> test;

  // cost
  std::optional<double> n_docs;
  std::string model;
  std::optional<double> tokens;
  std::optional<double> rate;
  std::optional<double> fixed;
  std::string rates;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--divergence", f.divergence, "kl or js");
  cmd->add_option("--patience", f.patience, "geometric attention parameter");
  cmd->add_option("--attention", f.attention, "geometric, log or uniform");
  cmd->add_option("--cutoff", f.cutoff, "last rank receiving attention");
  cmd->add_option("--target", f.target, "qrels, uniform or a target file");
  cmd->add_flag("--json", f.json, "machine-readable output on stdout");
  cmd->add_option("--threads", f.threads, "worker threads (0: all cores)");
}

void add_inputs(CLI::App* cmd, Flags& f) {
  cmd->add_option("--run", f.runs, "run file (repeatable)");
  cmd->add_option("--qrels", f.qrels, "qrels file");
  cmd->add_option("--annotations", f.annotations, "group membership table");
  cmd->add_option("--format", f.format, "annotation format: tsv or jsonl");
  cmd->add_option("--scheme-def", f.scheme_defs,
                  "scheme declaration name:label,label,... (repeatable)");
  cmd->add_option("--unknown-label", f.unknown_label,
                  "label treated as the unknown group in --scheme-def");
  cmd->add_option("--scheme", f.schemes, "scheme to evaluate (repeatable)");
  cmd->add_option("--relevance", f.relevance, "binary or graded");
  cmd->add_option("--fallback", f.fallback,
                  "missing documents: uniform, unknown or reject");
  cmd->add_flag("--complement", f.complement, "report 1 - JS / ln 2");
  cmd->add_flag("--ee", f.expected_exposure, "add expected-exposure metrics");
  cmd->add_flag("--no-overall", f.no_overall,
                "skip the intersectional scheme");
}

void add_correlation(CLI::App* cmd, Flags& f) {
  cmd->add_option("--alpha", f.alpha, "significance level");
  cmd->add_flag("--exclude-missing", f.exclude_missing,
                "drop queries some system did not answer");
}

void add_testbed(CLI::App* cmd, Flags& f) {
  cmd->add_option("--queries", f.queries, "synthetic queries");
  cmd->add_option("--docs", f.docs, "synthetic documents per query");
  cmd->add_option("--groups", f.groups, "synthetic groups");
  cmd->add_option("--systems", f.systems, "synthetic systems");
  cmd->add_option("--spread", f.spread, "fairness spread across systems");
}

std::vector<double> parse_levels(const std::string& text) {
  std::vector<double> out;
  for (auto part : split(text, ',')) {
    try {
      out.push_back(std::stod(std::string(part)));
    } catch (const std::exception&) {
      config_error("bad accuracy level '" + std::string(part) + "'");
    }
  }
  return out;
}

ExperimentConfig build_config(const Flags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{}
                                        : load_experiment_config(f.config);
  if (f.config.empty()) {
    c.testbed.seed = c.sweep.seed = c.sample.seed = c.seed;
  }
  if (f.seed) {
    c.seed = *f.seed;
    c.testbed.seed = c.sweep.seed = c.sample.seed = *f.seed;
  }
  if (!f.out.empty()) c.out = f.out;
  auto& ev = c.evaluation;
  if (!f.divergence.empty()) ev.divergence = parse_divergence(f.divergence);
  if (!f.attention.empty() || f.patience || f.cutoff) {
    const std::string kind = !f.attention.empty() ? f.attention
                             : ev.attention.kind() == AttentionModel::Kind::kLogDiscount
                                 ? "log"
                             : ev.attention.kind() == AttentionModel::Kind::kUniform
                                 ? "uniform"
                                 : "geometric";
    const auto cutoff = f.cutoff ? f.cutoff : ev.attention.cutoff();
    if (kind == "geometric") {
      const double p = f.patience ? *f.patience
                       : ev.attention.kind() == AttentionModel::Kind::kGeometric
                           ? ev.attention.patience()
                           : 0.5;
      ev.attention = AttentionModel::geometric(p, cutoff);
    } else if (kind == "log") {
      ev.attention = AttentionModel::log_discount(cutoff);
    } else if (kind == "uniform") {
      if (!cutoff) config_error("uniform attention needs --cutoff");
      ev.attention = AttentionModel::uniform(*cutoff);
    } else {
      config_error("unknown attention model '" + kind + "'");
    }
  }
  if (!f.target.empty()) set_target(c, f.target, {});
  if (f.threads) c.threads = *f.threads;

  if (!f.runs.empty()) {
    c.runs.assign(f.runs.begin(), f.runs.end());
  }
  if (!f.qrels.empty()) c.qrels = f.qrels;
  if (!f.annotations.empty()) c.annotations = f.annotations;
  if (!f.annotations_b.empty()) c.annotations_b = f.annotations_b;
  if (!f.reports_a.empty()) c.reports_a = f.reports_a;
  if (!f.reports_b.empty()) c.reports_b = f.reports_b;
  if (!f.rates.empty()) c.rates = f.rates;
  if (!f.format.empty()) c.annotation_format = parse_annotation_format(f.format);
  if (!f.scheme_defs.empty()) {
    c.schemes.clear();
    for (const auto& d : f.scheme_defs) {
      c.schemes.push_back(parse_scheme_declaration(d, f.unknown_label));
    }
  }
  if (!f.schemes.empty()) c.evaluate_schemes = f.schemes;
  if (!f.relevance.empty()) ev.relevance = parse_relevance_mode(f.relevance);
  if (!f.fallback.empty()) ev.fallback = parse_missing_policy(f.fallback);
  if (f.complement) ev.complement = true;
  if (f.expected_exposure) ev.expected_exposure = true;
  if (f.no_overall) ev.overall = false;
  if (f.alpha) c.correlation.alpha = *f.alpha;
  if (f.exclude_missing) c.correlation.exclude_missing = true;

  if (!f.levels.empty()) c.sweep.levels = parse_levels(f.levels);
  if (f.trials) c.sweep.trials = *f.trials;
  if (!f.mode.empty()) c.sweep.mode = parse_corruption_mode(f.mode);
  if (!f.style.empty()) c.sweep.style = parse_confusion_style(f.style);
  if (f.queries) c.testbed.queries = *f.queries;
  if (f.docs) c.testbed.docs_per_query = *f.docs;
  if (f.groups) c.testbed.groups = *f.groups;
  if (f.systems) c.testbed.systems = *f.systems;
  if (f.spread) c.testbed.spread = *f.spread;
  if (f.train) c.sample.train_per_group = *f.train;
  if (f.test) c.sample.test_per_group = *f.test;
  ev.threads = c.threads;
  c.sweep.threads = c.threads;

  // Every referenced input must exist before any work starts.
  auto must_exist = [](const fs::path& p, std::string_view what) {
    if (!fs::exists(p)) {
      config_error(std::string(what) + " '" + p.string() + "' does not exist");
    }
  };
  for (const auto& r : c.runs) must_exist(r, "run file");
  if (c.qrels) must_exist(*c.qrels, "qrels file");
  if (c.annotations) must_exist(*c.annotations, "annotation file");
  if (c.annotations_b) must_exist(*c.annotations_b, "annotation file");
  if (c.reports_a) must_exist(*c.reports_a, "report file");
  if (c.reports_b) must_exist(*c.reports_b, "report file");
  if (c.target_file) must_exist(*c.target_file, "target file");
  if (c.rates) must_exist(*c.rates, "rate file");
  return c;
}

void require(bool ok, const std::string& message) {
  if (!ok) config_error(message);
}

std::vector<std::string> scheme_names(const ExperimentConfig& c) {
  if (!c.evaluate_schemes.empty()) return c.evaluate_schemes;
  std::vector<std::string> out;
  for (const auto& s : c.schemes) out.push_back(s->name());
  return out;
}

RunSet load_runs(const ExperimentConfig& c) {
  require(!c.runs.empty(), "no run files given (--run)");
  RunSet runs;
  for (const auto& path : c.runs) runs.merge(load_run_file(path));
  return runs;
}

std::optional<Qrels> load_qrels(const ExperimentConfig& c) {
  const bool needed = c.evaluation.target == TargetMode::kQrels ||
                      c.evaluation.expected_exposure;
  if (!c.qrels) {
    require(!needed, "target mode qrels needs a qrels file (--qrels)");
    return std::nullopt;
  }
  return load_qrels_file(*c.qrels);
}

GroupMembershipTable load_table(const ExperimentConfig& c,
                                const std::optional<fs::path>& path,
                                Provenance provenance) {
  require(path.has_value(), "no annotation file given (--annotations)");
  require(!c.schemes.empty(), "no group schemes declared (--scheme-def)");
  return load_annotation_file(*path, c.annotation_format, c.schemes,
                              provenance);
}

EvaluationConfig evaluation_config(const ExperimentConfig& c) {
  EvaluationConfig ev = c.evaluation;
  if (ev.target == TargetMode::kFixed) {
    ev.fixed_targets = parse_target_file(read_file(*c.target_file), c.schemes);
  }
  return ev;
}

std::string summary_text(const ReportSet& reports) {
  std::ostringstream out;
  for (const auto& [system, report] : reports) {
    for (const auto& [metric, value] : report.aggregate) {
      out << system << '\t' << metric << '\t' << format_double(value) << '\n';
    }
  }
  return out.str();
}

int cmd_evaluate(const ExperimentConfig& c, bool as_json, std::ostream& out) {
  const auto runs = load_runs(c);
  const auto qrels = load_qrels(c);
  const auto table = load_table(c, c.annotations, Provenance::kHuman);
  const auto schemes = scheme_names(c);
  const auto reports = evaluate_runset(runs, qrels ? &*qrels : nullptr, table,
                                       schemes, evaluation_config(c));
  OutputSet files;
  files.add("metrics.csv", reports_to_csv(reports));
  files.add("summary.csv", aggregates_to_csv(reports));
  files.add("metrics.json", reports_to_json(reports));
  files.commit(c.out);
  out << (as_json ? reports_to_json(reports) : summary_text(reports));
  return 0;
}

int cmd_compare(const ExperimentConfig& c, bool as_json, std::ostream& out) {
  ReportSet a;
  ReportSet b;
  OutputSet files;
  if (c.reports_a || c.reports_b) {
    require(c.reports_a && c.reports_b,
            "compare needs both --reports-a and --reports-b");
    a = reports_from_json(read_file(*c.reports_a));
    b = reports_from_json(read_file(*c.reports_b));
  } else {
    require(c.annotations_b.has_value(),
            "compare needs a second annotation file (--annotations-b)");
    const auto runs = load_runs(c);
    const auto qrels = load_qrels(c);
    const auto table_a = load_table(c, c.annotations, Provenance::kHuman);
    const auto table_b = load_table(c, c.annotations_b, Provenance::kModel);
    const auto schemes = scheme_names(c);
    const auto ev = evaluation_config(c);
    const Qrels* q = qrels ? &*qrels : nullptr;
    a = evaluate_runset(runs, q, table_a, schemes, ev);
    b = evaluate_runset(runs, q, table_b, schemes, ev);
    files.add("metrics_a.json", reports_to_json(a));
    files.add("metrics_b.json", reports_to_json(b));
  }
  const auto system =
      correlation_report(a, b, CorrelationLevel::kSystem, c.correlation);
  const auto query =
      correlation_report(a, b, CorrelationLevel::kQuery, c.correlation);
  files.add("correlation_system.csv", correlation_to_csv(system));
  files.add("correlation_query.csv", correlation_to_csv(query));
  files.add("correlation.json", correlation_to_json(system, query));
  files.commit(c.out);
  if (as_json) {
    out << correlation_to_json(system, query);
  } else {
    out << "system level\n" << correlation_to_text(system);
  }
  return 0;
}

int cmd_sweep(const ExperimentConfig& c, bool as_json, std::ostream& out) {
  Testbed bed;
  SweepConfig sweep = c.sweep;
  sweep.metric = evaluation_config(c);
  sweep.threads = c.threads;
  if (!c.runs.empty() || c.annotations) {
    // Real data: the annotation file is the reference labeling.
    bed.runs = load_runs(c);
    if (auto q = load_qrels(c)) bed.qrels = std::move(*q);
    bed.table = load_table(c, c.annotations, Provenance::kHuman);
    const auto names = scheme_names(c);
    const std::string scheme = sweep.scheme.empty() ? names.front() : sweep.scheme;
    bed.scheme = bed.table.scheme(scheme);
    sweep.scheme = scheme;
  } else {
    bed = generate_testbed(c.testbed);
  }
  const auto result = accuracy_sweep(bed, sweep);
  OutputSet files;
  files.add("sweep.csv", sweep_to_csv(result));
  files.add("sweep_series.csv", sweep_series_csv(result));
  files.add("sweep_query.csv", sweep_query_csv(result));
  files.add("sweep.json", sweep_to_json(result));
  files.commit(c.out);
  out << (as_json ? sweep_to_json(result) : sweep_series_csv(result));
  return 0;
}

int cmd_sample(const ExperimentConfig& c, bool as_json, std::ostream& out) {
  const auto table = load_table(c, c.annotations, Provenance::kHuman);
  SamplePlan plan = c.sample;
  if (plan.scheme.empty()) plan.scheme = scheme_names(c).front();
  const auto split = stratified_sample(table, plan);
  auto lines = [](const std::vector<std::string>& ids) {
    std::string s;
    for (const auto& id : ids) s += id + "\n";
    return s;
  };
  OutputSet files;
  files.add("train.txt", lines(split.train));
  files.add("test.txt", lines(split.test));
  files.commit(c.out);
  if (as_json) {
    out << json{{"train", split.train.size()}, {"test", split.test.size()}}.dump()
        << '\n';
  } else {
    out << "train\t" << split.train.size() << "\ntest\t" << split.test.size()
        << '\n';
  }
  return 0;
}

int cmd_gen_testbed(const ExperimentConfig& c, bool as_json, std::ostream& out) {
  const auto bed = generate_testbed(c.testbed);
  nlohmann::ordered_json experiment;
  experiment["runs"] = {"runs.txt"};
  experiment["qrels"] = "qrels.txt";
  experiment["annotations"] = "annotations.tsv";
  experiment["schemes"] = {{{"name", bed.scheme->name()},
                            {"groups", bed.scheme->labels()}}};
  experiment["seed"] = c.seed;
  OutputSet files;
  files.add("annotations.tsv", write_annotations(bed.table, AnnotationFormat::kTsv));
  files.add("qrels.txt", write_qrels(bed.qrels));
  files.add("runs.txt", write_run(bed.runs));
  files.add("experiment.json", experiment.dump(2) + "\n");
  files.commit(c.out);
  const auto n_docs = bed.table.size(bed.scheme->name());
  if (as_json) {
    out << json{{"documents", n_docs},
                {"queries", bed.qrels.queries().size()},
                {"systems", bed.runs.systems().size()}}
               .dump()
        << '\n';
  } else {
    out << "documents\t" << n_docs << "\nqueries\t" << bed.qrels.queries().size()
        << "\nsystems\t" << bed.runs.systems().size() << '\n';
  }
  return 0;
}

std::string format_count(double n) {
  if (n == std::floor(n) && std::fabs(n) < 1e15) {
    return std::to_string(static_cast<long long>(n));
  }
  return format_double(n);
}

int cmd_cost(const ExperimentConfig& c, const Flags& f, std::ostream& out) {
  require(f.n_docs.has_value(), "cost needs --docs");
  const RateTable table =
      c.rates ? parse_rate_table(read_file(*c.rates)) : default_rate_table();
  AnnotationRate rate = table.find(f.model.empty() ? table.default_model : f.model);
  if (f.tokens) rate.tokens_per_doc = *f.tokens;
  if (f.rate) rate.rate_per_million_tokens = *f.rate;
  if (f.fixed) rate.fixed_cost = *f.fixed;
  const double variable =
      annotation_cost(*f.n_docs, rate.tokens_per_doc, rate.rate_per_million_tokens, 0.0);
  const double total = annotation_cost(*f.n_docs, rate.tokens_per_doc,
                                       rate.rate_per_million_tokens, rate.fixed_cost);
  if (f.json) {
    nlohmann::ordered_json j;
    j["model"] = rate.model;
    j["documents"] = *f.n_docs;
    j["tokens_per_doc"] = rate.tokens_per_doc;
    j["rate_per_million_tokens"] = rate.rate_per_million_tokens;
    j["variable_cost"] = variable;
    j["fixed_cost"] = rate.fixed_cost;
    j["total"] = total;
    j["currency"] = table.currency;
    j["rate_table_version"] = table.version;
    out << j.dump() << '\n';
  } else {
    out << "model\t" << rate.model << '\n'
        << "documents\t" << format_count(*f.n_docs) << '\n'
        << "tokens_per_doc\t" << format_double(rate.tokens_per_doc) << '\n'
        << "rate_per_million_tokens\t" << format_double(rate.rate_per_million_tokens)
        << '\n'
        << "variable_cost\t" << format_double(variable) << '\n'
        << "fixed_cost\t" << format_double(rate.fixed_cost) << '\n'
        << "total\t" << format_double(total) << ' ' << table.currency << '\n';
  }
  return 0;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Group-fairness evaluation under annotation noise", "fairgm"};
  app.require_subcommand(1);
  Flags f;

  auto* evaluate = app.add_subcommand("evaluate", "score runs with AWRF and EE");
  add_common(evaluate, f);
  add_inputs(evaluate, f);

  auto* compare = app.add_subcommand(
      "compare", "correlate metrics under two annotation sources");
  add_common(compare, f);
  add_inputs(compare, f);
  add_correlation(compare, f);
  compare->add_option("--annotations-b", f.annotations_b,
                      "second group membership table");
  compare->add_option("--reports-a", f.reports_a, "metrics.json of source A");
  compare->add_option("--reports-b", f.reports_b, "metrics.json of source B");

  auto* sweep = app.add_subcommand(
      "sweep", "annotation accuracy versus metric correlation");
  add_common(sweep, f);
  add_inputs(sweep, f);
  add_testbed(sweep, f);
  sweep->add_option("--levels", f.levels, "comma-separated accuracy levels");
  sweep->add_option("--trials", f.trials, "trials per level");
  sweep->add_option("--mode", f.mode, "hard or soft corruption");
  sweep->add_option("--style", f.style, "uniform or biased confusion");

  auto* sample = app.add_subcommand("sample", "stratified train/test split");
  add_common(sample, f);
  add_inputs(sample, f);
  sample->add_option("--train", f.train, "training documents per group");
  sample->add_option("--test", f.test, "test documents per group");

  auto* gen = app.add_subcommand("gen-testbed", "write a synthetic testbed");
  add_common(gen, f);
  add_testbed(gen, f);

  auto* cost = app.add_subcommand("cost", "estimate LLM annotation cost");
  add_common(cost, f);
  cost->add_option("--docs", f.n_docs, "documents to annotate");
  cost->add_option("--model", f.model, "model name in the rate table");
  cost->add_option("--tokens", f.tokens, "tokens per document");
  cost->add_option("--rate", f.rate, "price per million tokens");
  cost->add_option("--fixed", f.fixed, "fixed cost, e.g. fine-tuning");
  cost->add_option("--rates", f.rates, "rate table JSON");

  std::vector<std::string> storage{"fairgm"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    const ExperimentConfig config = build_config(f);
    if (evaluate->parsed()) return cmd_evaluate(config, f.json, out);
    if (compare->parsed()) return cmd_compare(config, f.json, out);
    if (sweep->parsed()) return cmd_sweep(config, f.json, out);
    if (sample->parsed()) return cmd_sample(config, f.json, out);
    if (gen->parsed()) return cmd_gen_testbed(config, f.json, out);
    if (cost->parsed()) return cmd_cost(config, f, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace fairgm::cli
