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

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairgm/core.hpp"
#include "fairgm/exposure.hpp"

namespace fairgm {

inline constexpr double kDefaultKlSmoothing = 1e-10;

enum class Divergence { kKl, kJs };
Divergence parse_divergence(std::string_view text);
std::string_view to_string(Divergence d);

// Natural-log KL divergence. Both arguments are smoothed by `epsilon` and
// renormalized inside the logarithm; the outer weights are the raw p_i.
double kl_divergence(std::span<const double> p, std::span<const double> q,
                     double epsilon = kDefaultKlSmoothing);
// Natural-log Jensen-Shannon divergence, in [0, ln 2]. Unsmoothed.
double js_divergence(std::span<const double> p, std::span<const double> q);
double divergence(Divergence kind, std::span<const double> p,
                  std::span<const double> q);

// Divergence between the normalized cumulative exposure of the ranking and the
// normalized target. Lower is fairer.
double awrf(const Ranking& ranking, const MembershipLookup& lookup,
            const AttentionModel& model, const ExposureVector& target,
            Divergence kind);
double awrf(const Ranking& ranking, const GroupMembershipTable& table,
            std::string_view scheme, const AttentionModel& model,
            const ExposureVector& target, Divergence kind,
            MissingPolicy fallback = MissingPolicy::kUniform);

struct ExpectedExposureMetrics {
  double loss = 0.0;        // ||gamma - gamma*||^2
  double disparity = 0.0;   // ||gamma||^2
  double relevance = 0.0;   // 2 gamma . gamma*
};

ExpectedExposureMetrics ee_metrics(const ExposureVector& gamma,
                                   const ExposureVector& gamma_star);

enum class TargetMode { kQrels, kUniform, kFixed };
TargetMode parse_target_mode(std::string_view text);

struct EvaluationConfig {
  AttentionModel attention = AttentionModel::geometric(0.5);
  Divergence divergence = Divergence::kJs;
  TargetMode target = TargetMode::kQrels;
  RelevanceMode relevance = RelevanceMode::kBinary;
  // Average relevant documents of all queries instead of per query.
  bool corpus_target = false;
  // Uniform targets put no mass on the scheme's unknown group.
  bool exclude_unknown = false;
  // Scheme name -> target distribution, for TargetMode::kFixed. The
  // intersectional target defaults to the product of the component targets.
  std::map<std::string, std::vector<double>> fixed_targets;
  MissingPolicy fallback = MissingPolicy::kUniform;
  // Adds the intersection of all evaluated schemes as metric "overall".
  bool overall = true;
  // Reports 1 - JS / ln 2 (higher is fairer). JS only.
  bool complement = false;
  // Adds ee_l / ee_d / ee_r per scheme. Needs qrels.
  bool expected_exposure = false;
  // Rankings whose query ids share the prefix before this character form one
  // ranking sequence; without it every ranking is its own sequence.
  std::optional<char> sequence_separator;
  // Evaluation queries. Empty: the qrels queries in qrels mode, otherwise the
  // union of the run queries.
  std::vector<std::string> queries;
  unsigned threads = 1;
};

inline constexpr std::string_view kOverallScheme = "overall";

std::string awrf_metric_name(std::string_view scheme, bool complement);

struct MetricReport {
  std::string system;
  // query -> metric -> value
  std::map<std::string, std::map<std::string, double>> per_query;
  // metric -> mean over evaluation queries
  std::map<std::string, double> aggregate;
  // Evaluation queries the system returned nothing for; scored worst-case.
  std::set<std::string> missing_queries;

  bool operator==(const MetricReport&) const = default;
};

using ReportSet = std::map<std::string, MetricReport>;

// Scores every system on every evaluation query. Queries absent from a system
// score the worst case: ln 2 for JS, the largest one-hot KL for KL.
ReportSet evaluate_runset(const RunSet& runs, const Qrels* qrels,
                          const GroupMembershipTable& table,
                          std::span<const std::string> schemes,
                          const EvaluationConfig& config);

// `system,query,metric,value`, sorted.
std::string reports_to_csv(const ReportSet& reports);
// `system,metric,value`, sorted.
std::string aggregates_to_csv(const ReportSet& reports);
std::string reports_to_json(const ReportSet& reports);
ReportSet reports_from_json(std::string_view text);

}  // namespace fairgm
