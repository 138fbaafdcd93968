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
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fairgm/core.hpp"
#include "fairgm/metrics.hpp"
#include "fairgm/stats.hpp"

namespace fairgm {

// Row-stochastic relabeling model: at(i, j) is the probability that a
// document of true group i is annotated as group j.
class ConfusionMatrix {
 public:
  ConfusionMatrix(SchemePtr scheme, std::vector<std::vector<double>> rows);
  static ConfusionMatrix identity(SchemePtr scheme);

  const SchemePtr& scheme() const noexcept { return scheme_; }
  std::size_t size() const noexcept { return rows_.size(); }
  double at(std::size_t i, std::size_t j) const { return rows_[i][j]; }
  const std::vector<double>& row(std::size_t i) const { return rows_[i]; }
  // Expected accuracy when true groups are balanced.
  double mean_diagonal() const;

 private:
  SchemePtr scheme_;
  std::vector<std::vector<double>> rows_;
};

enum class ConfusionStyle {
  // Errors spread evenly over the other groups.
  kUniform,
  // Errors of every other group land in one sink group; the sink's own
  // errors are spread evenly.
  kBiased,
};
ConfusionStyle parse_confusion_style(std::string_view text);

// Diagonal equal to `accuracy`, which must lie in [1/k, 1].
ConfusionMatrix confusion_for_accuracy(SchemePtr scheme, double accuracy,
                                       ConfusionStyle style = ConfusionStyle::kUniform,
                                       std::size_t sink_group = 0);

enum class CorruptionMode {
  // Each document's argmax group is redrawn as a one-hot label from the
  // matrix row, using a random stream keyed by (seed, scheme, document id).
  kHard,
  // Each vector v becomes v^T M.
  kSoft,
};
CorruptionMode parse_corruption_mode(std::string_view text);

// Returns a copy of `table` with the matrix's scheme corrupted and provenance
// set to synthetic. Other schemes are copied unchanged.
GroupMembershipTable apply_confusion(const GroupMembershipTable& table,
                                     const ConfusionMatrix& matrix,
                                     std::uint64_t seed, CorruptionMode mode);

struct TestbedConfig {
  std::size_t queries = 50;
  std::size_t docs_per_query = 1000;
  std::size_t groups = 4;
  std::size_t systems = 30;
  // System s mixes the skewed ranking in with probability
  // spread * s / (systems - 1).
  double spread = 1.0;
  // Probability of relevance grade 0, 1, 2, ...
  std::vector<double> grade_distribution{0.7, 0.2, 0.1};
  std::uint64_t seed = 42;

  void validate() const;
};

struct Testbed {
  SchemePtr scheme;
  GroupMembershipTable table;
  Qrels qrels;
  RunSet runs;
};

// Documents receive uniformly random one-hot groups and random grades. Each
// system builds every ranking position by taking the next unused document of
// either a group-balanced list (round-robin over groups) or a maximally
// skewed list (one group first), so fairness degrades with the system index.
Testbed generate_testbed(const TestbedConfig& config);

struct QueryCorrelationSummary {
  std::size_t defined = 0;  // queries with a defined coefficient
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  double fraction_significant = 0.0;
};

struct SweepTrial {
  double accuracy = 0.0;
  std::size_t trial = 0;
  CorrelationResult pearson;
  CorrelationResult spearman;
  QueryCorrelationSummary query;
  std::vector<CorrelationRow> query_rows;
};

struct SweepLevel {
  double accuracy = 0.0;
  double pearson_r = 0.0;
  double pearson_p = 0.0;
  double spearman_rho = 0.0;
  double spearman_p = 0.0;
  double query_mean_r = 0.0;
  double query_fraction_significant = 0.0;
};

struct SweepResult {
  std::string metric;
  std::vector<SweepTrial> trials;  // level-major, then trial
  std::vector<SweepLevel> levels;  // trial means
};

struct SweepConfig {
  std::vector<double> levels{0.25, 0.4, 0.55, 0.7, 0.8, 0.9, 1.0};
  std::size_t trials = 5;
  EvaluationConfig metric;
  // Scheme to corrupt and score; empty means the testbed scheme.
  std::string scheme;
  std::uint64_t seed = 7;
  CorruptionMode mode = CorruptionMode::kHard;
  ConfusionStyle style = ConfusionStyle::kUniform;
  unsigned threads = 1;
};

// For every level and trial: corrupt the annotations, re-evaluate all systems
// and correlate the degraded system (and per-query) scores with the scores
// under the original annotations. Trial t uses the same random stream at
// every level.
SweepResult accuracy_sweep(const Testbed& testbed, const SweepConfig& config);

// `accuracy,trial,pearson_r,pearson_p,spearman_rho,spearman_p`; trial rows
// first, then one row per level with trial = "mean".
std::string sweep_to_csv(const SweepResult& result);
// Plot series: one row per level.
std::string sweep_series_csv(const SweepResult& result);
// `accuracy,trial,query,pearson_r,pearson_p`.
std::string sweep_query_csv(const SweepResult& result);
std::string sweep_to_json(const SweepResult& result);

// n_docs * tokens_per_doc * rate / 1e6 + fixed_cost.
double annotation_cost(double n_docs, double tokens_per_doc,
                       double rate_per_million_tokens, double fixed_cost);

struct AnnotationRate {
  std::string model;
  double rate_per_million_tokens = 0.0;
  double tokens_per_doc = 0.0;
  double fixed_cost = 0.0;
};

struct RateTable {
  int version = 0;
  std::string currency;
  std::string default_model;
  std::vector<AnnotationRate> models;

  const AnnotationRate& find(std::string_view model) const;
};

RateTable parse_rate_table(std::string_view json_text);
// The rate table shipped in config/annotation_rates.json.
const RateTable& default_rate_table();

}  // namespace fairgm
