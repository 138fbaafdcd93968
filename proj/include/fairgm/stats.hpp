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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairgm/metrics.hpp"

namespace fairgm {

struct CorrelationResult {
  double coefficient = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

enum class SpearmanPValue {
  kTDistribution,
  // Exact two-sided permutation test; only for n < 10.
  kExactPermutation,
};

// Two-sided p-value of a sample correlation r over n pairs using
// t = r sqrt((n-2)/(1-r^2)) with n-2 degrees of freedom.
double correlation_p_value(double r, std::size_t n);

// Throws LengthMismatch, TooFewSamples (n < 3) or ConstantInput.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);
CorrelationResult spearman(std::span<const double> x, std::span<const double> y,
                           SpearmanPValue method = SpearmanPValue::kTDistribution);

// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

double spearman_permutation_p_value(std::span<const double> x,
                                    std::span<const double> y);

enum class CorrelationLevel { kSystem, kQuery };

struct CorrelationRow {
  std::string metric;
  std::string query;  // empty at system level
  std::size_t n = 0;
  std::optional<CorrelationResult> pearson;
  std::optional<CorrelationResult> spearman;
  std::string note;  // why a coefficient is undefined

  bool pearson_significant(double alpha) const {
    return pearson && pearson->p_value < alpha;
  }
  bool spearman_significant(double alpha) const {
    return spearman && spearman->p_value < alpha;
  }
};

struct CorrelationOptions {
  double alpha = 0.05;
  // Query level: drop queries that some system scored as missing.
  bool exclude_missing = false;
  SpearmanPValue spearman_p = SpearmanPValue::kTDistribution;
};

struct CorrelationTable {
  CorrelationLevel level = CorrelationLevel::kSystem;
  double alpha = 0.05;
  std::vector<CorrelationRow> rows;  // sorted by metric, then query
};

// System level: one row per metric over paired system aggregates. Query level:
// one row per (metric, query) over paired per-system scores.
CorrelationTable correlation_report(const ReportSet& a, const ReportSet& b,
                                    CorrelationLevel level,
                                    const CorrelationOptions& options = {});

// System level: `level,metric,pearson_r,pearson_p,spearman_rho,spearman_p,
// significant`; query level adds a `query` column after `metric`.
std::string correlation_to_csv(const CorrelationTable& table);
std::string correlation_to_json(const CorrelationTable& system,
                                const CorrelationTable& query);
// Human-readable table with significant coefficients starred.
std::string correlation_to_text(const CorrelationTable& table);

}  // namespace fairgm
