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
#include "fairgm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "fairgm/generated/default_rates.hpp"
#include "fairgm/util.hpp"
#include "json.hpp"

namespace fairgm {

ConfusionMatrix::ConfusionMatrix(SchemePtr scheme,
                                 std::vector<std::vector<double>> rows)
    : scheme_(std::move(scheme)), rows_(std::move(rows)) {
  if (!scheme_) throw Error(ErrorCode::kInvalidArgument, "null scheme");
  const std::size_t k = scheme_->size();
  if (rows_.size() != k) {
    throw Error(ErrorCode::kLengthMismatch,
                "confusion matrix needs " + std::to_string(k) + " rows");
  }
  for (const auto& row : rows_) {
    if (row.size() != k) {
      throw Error(ErrorCode::kLengthMismatch,
                  "confusion matrix rows need " + std::to_string(k) + " entries");
    }
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::kNotADistribution,
                    "confusion matrix entries must be non-negative");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorCode::kNotADistribution,
                  "confusion matrix row sums to " + format_double(sum));
    }
  }
}

ConfusionMatrix ConfusionMatrix::identity(SchemePtr scheme) {
  const std::size_t k = scheme->size();
  std::vector<std::vector<double>> rows(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) rows[i][i] = 1.0;
  return ConfusionMatrix(std::move(scheme), std::move(rows));
}

double ConfusionMatrix::mean_diagonal() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < rows_.size(); ++i) sum += rows_[i][i];
  return sum / static_cast<double>(rows_.size());
}

ConfusionStyle parse_confusion_style(std::string_view text) {
  if (text == "uniform") return ConfusionStyle::kUniform;
  if (text == "biased") return ConfusionStyle::kBiased;
  throw Error(ErrorCode::kConfigError,
              "unknown confusion style '" + std::string(text) + "'");
}

ConfusionMatrix confusion_for_accuracy(SchemePtr scheme, double accuracy,
                                       ConfusionStyle style,
                                       std::size_t sink_group) {
  if (!scheme) throw Error(ErrorCode::kInvalidArgument, "null scheme");
  const std::size_t k = scheme->size();
  const double floor = 1.0 / static_cast<double>(k);
  if (!(accuracy >= floor - 1e-12 && accuracy <= 1.0)) {
    throw Error(ErrorCode::kAccuracyOutOfRange,
                "accuracy " + format_double(accuracy) + " outside [1/" +
                    std::to_string(k) + ", 1]");
  }
  if (sink_group >= k) {
    throw Error(ErrorCode::kInvalidArgument, "sink group out of range");
  }
  const double spread = (1.0 - accuracy) / static_cast<double>(k - 1);
  std::vector<std::vector<double>> rows(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    if (style == ConfusionStyle::kUniform || i == sink_group) {
      std::fill(rows[i].begin(), rows[i].end(), spread);
    } else {
      rows[i][sink_group] = 1.0 - accuracy;
    }
    rows[i][i] = accuracy;
  }
  return ConfusionMatrix(std::move(scheme), std::move(rows));
}

CorruptionMode parse_corruption_mode(std::string_view text) {
  if (text == "hard") return CorruptionMode::kHard;
  if (text == "soft") return CorruptionMode::kSoft;
  throw Error(ErrorCode::kConfigError,
              "unknown corruption mode '" + std::string(text) + "'");
}

GroupMembershipTable apply_confusion(const GroupMembershipTable& table,
                                     const ConfusionMatrix& matrix,
                                     std::uint64_t seed, CorruptionMode mode) {
  const SchemePtr& scheme = matrix.scheme();
  const SchemePtr& registered = table.scheme(scheme->name());
  if (!(*registered == *scheme)) {
    throw Error(ErrorCode::kConfigError,
                "confusion matrix scheme differs from the table's '" +
                    scheme->name() + "'");
  }
  GroupMembershipTable out(Provenance::kSynthetic);
  for (const auto& s : table.schemes()) {
    out.add_scheme(s);
    if (s->name() == scheme->name()) continue;
    for (const auto& [doc, v] : table.entries(s->name())) out.insert(doc, v);
  }
  const std::size_t k = scheme->size();
  const std::uint64_t stream = combine_seed(seed, hash_string(scheme->name()));
  std::vector<double> mixed(k);
  for (const auto& [doc, v] : table.entries(scheme->name())) {
    if (mode == CorruptionMode::kHard) {
      const auto& row = matrix.row(v.argmax());
      const double u = to_unit_interval(hash_string(doc, stream));
      std::size_t pick = k;
      double cumulative = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        if (row[j] <= 0.0) continue;
        cumulative += row[j];
        pick = j;
        if (u < cumulative) break;
      }
      out.insert(doc, MembershipVector::one_hot(registered, pick));
    } else {
      std::fill(mixed.begin(), mixed.end(), 0.0);
      for (std::size_t i = 0; i < k; ++i) {
        if (v[i] == 0.0) continue;
        for (std::size_t j = 0; j < k; ++j) mixed[j] += v[i] * matrix.at(i, j);
      }
      out.insert(doc, normalize(mixed, registered));
    }
  }
  return out;
}

void TestbedConfig::validate() const {
  if (queries < 1 || docs_per_query < 1 || systems < 1 || groups < 2) {
    throw Error(ErrorCode::kConfigError,
                "testbed needs >= 1 query, document and system and >= 2 groups");
  }
  if (!(spread >= 0.0 && spread <= 1.0)) {
    throw Error(ErrorCode::kConfigError, "spread must lie in [0, 1]");
  }
  if (grade_distribution.empty()) {
    throw Error(ErrorCode::kConfigError, "grade distribution is empty");
  }
  double sum = 0.0;
  for (double p : grade_distribution) {
    if (!(p >= 0.0)) {
      throw Error(ErrorCode::kConfigError, "grade probabilities must be >= 0");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kConfigError, "grade distribution must sum to 1");
  }
}

namespace {

std::string padded(std::string_view prefix, std::size_t value,
                   std::size_t count) {
  const std::size_t width = std::to_string(count).size();
  std::string digits = std::to_string(value);
  return std::string(prefix) + std::string(width - digits.size(), '0') + digits;
}

std::size_t draw_index(std::mt19937_64& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(to_unit_interval(rng()) *
                                                  static_cast<double>(n)));
}

}  // namespace

Testbed generate_testbed(const TestbedConfig& config) {
  config.validate();
  std::vector<std::string> labels;
  for (std::size_t g = 0; g < config.groups; ++g) {
    labels.push_back(padded("g", g, config.groups - 1));
  }
  Testbed bed{make_scheme("group", labels), GroupMembershipTable(Provenance::kSynthetic),
              {}, {}};
  bed.table.add_scheme(bed.scheme);

  const std::size_t n = config.docs_per_query;
  std::vector<std::string> tags;
  for (std::size_t s = 0; s < config.systems; ++s) {
    tags.push_back(padded("sys", s + 1, config.systems));
  }

  for (std::size_t q = 0; q < config.queries; ++q) {
    const std::string qid = padded("q", q + 1, config.queries);
    std::mt19937_64 rng(combine_seed(config.seed, q));

    std::vector<std::string> docs(n);
    std::vector<std::size_t> group(n);
    std::vector<int> grade(n);
    std::vector<double> tiebreak(n);
    bool any_relevant = false;
    for (std::size_t d = 0; d < n; ++d) {
      docs[d] = qid + "-" + padded("d", d + 1, n);
      group[d] = draw_index(rng, config.groups);
      const double u = to_unit_interval(rng());
      double cumulative = 0.0;
      grade[d] = static_cast<int>(config.grade_distribution.size()) - 1;
      for (std::size_t gi = 0; gi < config.grade_distribution.size(); ++gi) {
        cumulative += config.grade_distribution[gi];
        if (u < cumulative) {
          grade[d] = static_cast<int>(gi);
          break;
        }
      }
      any_relevant = any_relevant || grade[d] > 0;
      tiebreak[d] = to_unit_interval(rng());
    }
    if (!any_relevant) grade[0] = 1;
    for (std::size_t d = 0; d < n; ++d) {
      bed.table.insert(docs[d], MembershipVector::one_hot(bed.scheme, group[d]));
      bed.qrels.add(qid, docs[d], grade[d]);
    }

    // Per-group lists, most relevant first.
    std::vector<std::vector<std::size_t>> by_group(config.groups);
    for (std::size_t d = 0; d < n; ++d) by_group[group[d]].push_back(d);
    for (auto& list : by_group) {
      std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
        if (grade[a] != grade[b]) return grade[a] > grade[b];
        return tiebreak[a] < tiebreak[b];
      });
    }
    std::vector<std::size_t> group_order(config.groups);
    std::iota(group_order.begin(), group_order.end(), std::size_t{0});
    for (std::size_t i = group_order.size() - 1; i > 0; --i) {
      std::swap(group_order[i], group_order[draw_index(rng, i + 1)]);
    }
    std::vector<std::size_t> balanced;
    balanced.reserve(n);
    for (std::size_t round = 0; balanced.size() < n; ++round) {
      for (std::size_t g : group_order) {
        if (round < by_group[g].size()) balanced.push_back(by_group[g][round]);
      }
    }
    std::vector<std::size_t> skewed;
    skewed.reserve(n);
    for (std::size_t g : group_order) {
      skewed.insert(skewed.end(), by_group[g].begin(), by_group[g].end());
    }

    for (std::size_t s = 0; s < config.systems; ++s) {
      const double mix =
          config.systems > 1
              ? config.spread * static_cast<double>(s) /
                    static_cast<double>(config.systems - 1)
              : 0.0;
      std::mt19937_64 srng(combine_seed(combine_seed(config.seed, 0x5157ULL + s), q));
      std::vector<bool> used(n, false);
      std::size_t next_balanced = 0;
      std::size_t next_skewed = 0;
      std::vector<RankedDocument> entries;
      entries.reserve(n);
      for (std::size_t pos = 0; pos < n; ++pos) {
        const bool take_skewed = to_unit_interval(srng()) < mix;
        auto& list = take_skewed ? skewed : balanced;
        auto& next = take_skewed ? next_skewed : next_balanced;
        while (used[list[next]]) ++next;
        const std::size_t d = list[next];
        used[d] = true;
        entries.push_back({docs[d], static_cast<double>(n - pos)});
      }
      bed.runs.add(Ranking(qid, tags[s], std::move(entries)));
    }
  }
  return bed;
}

namespace {

QueryCorrelationSummary summarize(const std::vector<CorrelationRow>& rows,
                                  double alpha) {
  QueryCorrelationSummary out;
  std::vector<double> r;
  std::size_t significant = 0;
  for (const auto& row : rows) {
    if (!row.pearson) continue;
    r.push_back(row.pearson->coefficient);
    if (row.pearson_significant(alpha)) ++significant;
  }
  out.defined = r.size();
  if (r.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.mean = out.median = out.min = out.max = nan;
    return out;
  }
  std::sort(r.begin(), r.end());
  out.mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
  out.median = r.size() % 2 == 1
                   ? r[r.size() / 2]
                   : 0.5 * (r[r.size() / 2 - 1] + r[r.size() / 2]);
  out.min = r.front();
  out.max = r.back();
  out.fraction_significant =
      static_cast<double>(significant) / static_cast<double>(rows.size());
  return out;
}

CorrelationResult or_nan(const std::optional<CorrelationResult>& r,
                         std::size_t n) {
  if (r) return *r;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {nan, nan, n};
}

}  // namespace

SweepResult accuracy_sweep(const Testbed& testbed, const SweepConfig& config) {
  const std::string scheme_name =
      config.scheme.empty() ? testbed.scheme->name() : config.scheme;
  const SchemePtr& scheme = testbed.table.scheme(scheme_name);
  if (config.levels.empty()) {
    throw Error(ErrorCode::kConfigError, "no accuracy levels");
  }
  for (std::size_t i = 1; i < config.levels.size(); ++i) {
    if (!(config.levels[i] > config.levels[i - 1])) {
      throw Error(ErrorCode::kConfigError,
                  "accuracy levels must be strictly increasing");
    }
  }
  if (config.trials < 1) {
    throw Error(ErrorCode::kConfigError, "need at least one trial");
  }
  std::vector<ConfusionMatrix> matrices;
  for (double a : config.levels) {
    matrices.push_back(confusion_for_accuracy(scheme, a, config.style));
  }

  EvaluationConfig metric = config.metric;
  metric.threads = 1;
  const std::vector<std::string> schemes{scheme_name};
  const Qrels* qrels = testbed.qrels.empty() ? nullptr : &testbed.qrels;
  const ReportSet truth =
      evaluate_runset(testbed.runs, qrels, testbed.table, schemes, metric);

  SweepResult result;
  result.metric = awrf_metric_name(scheme_name, metric.complement);
  const std::size_t units = config.levels.size() * config.trials;
  result.trials.resize(units);
  CorrelationOptions options;
  parallel_for(units, config.threads, [&](std::size_t unit) {
    const std::size_t level = unit / config.trials;
    const std::size_t trial = unit % config.trials;
    const auto corrupted =
        apply_confusion(testbed.table, matrices[level],
                        combine_seed(config.seed, trial), config.mode);
    const ReportSet degraded =
        evaluate_runset(testbed.runs, qrels, corrupted, schemes, metric);

    SweepTrial& out = result.trials[unit];
    out.accuracy = config.levels[level];
    out.trial = trial;
    const auto system =
        correlation_report(truth, degraded, CorrelationLevel::kSystem, options);
    for (const auto& row : system.rows) {
      if (row.metric != result.metric) continue;
      out.pearson = or_nan(row.pearson, row.n);
      out.spearman = or_nan(row.spearman, row.n);
    }
    auto query =
        correlation_report(truth, degraded, CorrelationLevel::kQuery, options);
    for (auto& row : query.rows) {
      if (row.metric == result.metric) out.query_rows.push_back(std::move(row));
    }
    out.query = summarize(out.query_rows, options.alpha);
  });

  for (std::size_t level = 0; level < config.levels.size(); ++level) {
    SweepLevel mean{config.levels[level], 0, 0, 0, 0, 0, 0};
    for (std::size_t t = 0; t < config.trials; ++t) {
      const auto& tr = result.trials[level * config.trials + t];
      mean.pearson_r += tr.pearson.coefficient;
      mean.pearson_p += tr.pearson.p_value;
      mean.spearman_rho += tr.spearman.coefficient;
      mean.spearman_p += tr.spearman.p_value;
      mean.query_mean_r += tr.query.mean;
      mean.query_fraction_significant += tr.query.fraction_significant;
    }
    const double n = static_cast<double>(config.trials);
    mean.pearson_r /= n;
    mean.pearson_p /= n;
    mean.spearman_rho /= n;
    mean.spearman_p /= n;
    mean.query_mean_r /= n;
    mean.query_fraction_significant /= n;
    result.levels.push_back(mean);
  }
  return result;
}

std::string sweep_to_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "accuracy,trial,pearson_r,pearson_p,spearman_rho,spearman_p\n";
  for (const auto& t : result.trials) {
    out << format_double(t.accuracy) << ',' << t.trial << ','
        << format_double(t.pearson.coefficient) << ','
        << format_double(t.pearson.p_value) << ','
        << format_double(t.spearman.coefficient) << ','
        << format_double(t.spearman.p_value) << '\n';
  }
  for (const auto& l : result.levels) {
    out << format_double(l.accuracy) << ",mean," << format_double(l.pearson_r)
        << ',' << format_double(l.pearson_p) << ','
        << format_double(l.spearman_rho) << ',' << format_double(l.spearman_p)
        << '\n';
  }
  return out.str();
}

std::string sweep_series_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "accuracy,pearson_r,spearman_rho,query_mean_r,query_fraction_significant\n";
  for (const auto& l : result.levels) {
    out << format_double(l.accuracy) << ',' << format_double(l.pearson_r) << ','
        << format_double(l.spearman_rho) << ',' << format_double(l.query_mean_r)
        << ',' << format_double(l.query_fraction_significant) << '\n';
  }
  return out.str();
}

std::string sweep_query_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "accuracy,trial,query,pearson_r,pearson_p\n";
  for (const auto& t : result.trials) {
    for (const auto& row : t.query_rows) {
      out << format_double(t.accuracy) << ',' << t.trial << ',' << row.query
          << ',';
      if (row.pearson) {
        out << format_double(row.pearson->coefficient) << ','
            << format_double(row.pearson->p_value);
      } else {
        out << ',';
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string sweep_to_json(const SweepResult& result) {
  nlohmann::ordered_json root;
  root["metric"] = result.metric;
  root["trials"] = nlohmann::ordered_json::array();
  for (const auto& t : result.trials) {
    nlohmann::ordered_json j;
    j["accuracy"] = t.accuracy;
    j["trial"] = t.trial;
    j["pearson_r"] = t.pearson.coefficient;
    j["pearson_p"] = t.pearson.p_value;
    j["spearman_rho"] = t.spearman.coefficient;
    j["spearman_p"] = t.spearman.p_value;
    j["query"] = {{"defined", t.query.defined},
                  {"mean", t.query.mean},
                  {"median", t.query.median},
                  {"min", t.query.min},
                  {"max", t.query.max},
                  {"fraction_significant", t.query.fraction_significant}};
    root["trials"].push_back(std::move(j));
  }
  root["levels"] = nlohmann::ordered_json::array();
  for (const auto& l : result.levels) {
    root["levels"].push_back({{"accuracy", l.accuracy},
                              {"pearson_r", l.pearson_r},
                              {"pearson_p", l.pearson_p},
                              {"spearman_rho", l.spearman_rho},
                              {"spearman_p", l.spearman_p},
                              {"query_mean_r", l.query_mean_r},
                              {"query_fraction_significant",
                               l.query_fraction_significant}});
  }
  return root.dump(2) + "\n";
}

double annotation_cost(double n_docs, double tokens_per_doc,
                       double rate_per_million_tokens, double fixed_cost) {
  if (!(n_docs >= 0.0 && tokens_per_doc >= 0.0 &&
        rate_per_million_tokens >= 0.0 && fixed_cost >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cost inputs must be non-negative");
  }
  return n_docs * tokens_per_doc * rate_per_million_tokens / 1e6 + fixed_cost;
}

const AnnotationRate& RateTable::find(std::string_view model) const {
  for (const auto& m : models) {
    if (m.model == model) return m;
  }
  throw Error(ErrorCode::kConfigError,
              "no rate configured for model '" + std::string(model) + "'");
}

RateTable parse_rate_table(std::string_view json_text) {
  RateTable table;
  try {
    const auto j = nlohmann::json::parse(json_text);
    table.version = j.at("version").get<int>();
    table.currency = j.value("currency", std::string("USD"));
    table.default_model = j.at("default_model").get<std::string>();
    for (const auto& m : j.at("models")) {
      table.models.push_back({m.at("model").get<std::string>(),
                              m.at("rate_per_million_tokens").get<double>(),
                              m.at("tokens_per_doc").get<double>(),
                              m.value("fixed_cost", 0.0)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError,
                std::string("malformed rate table: ") + e.what());
  }
  table.find(table.default_model);
  return table;
}

const RateTable& default_rate_table() {
  static const RateTable table = parse_rate_table(generated::kDefaultRateTable);
  return table;
}

}  // namespace fairgm
