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
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fairgm/error.hpp"
#include "fairgm/stats.hpp"
#include "oracles.hpp"

namespace fairgm {
namespace {

using V = std::vector<double>;

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

TEST(Pearson, Examples) {
  EXPECT_EQ(pearson(V{1, 2, 3}, V{2, 4, 6}).coefficient, 1.0);
  EXPECT_EQ(pearson(V{1, 2, 3}, V{2, 4, 6}).p_value, 0.0);
  EXPECT_EQ(pearson(V{1, 2, 3, 7}, V{-1, -2, -3, -7}).coefficient, -1.0);
}

TEST(Pearson, Errors) {
  EXPECT_EQ(code_of([] { pearson(V{1, 1, 1}, V{1, 2, 3}); }),
            ErrorCode::kConstantInput);
  EXPECT_EQ(code_of([] { pearson(V{1, 2}, V{1, 2}); }), ErrorCode::kTooFewSamples);
  EXPECT_EQ(code_of([] { pearson(V{1, 2, 3}, V{1, 2}); }),
            ErrorCode::kLengthMismatch);
}

TEST(Pearson, AffineMaps) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 1);
  for (int i = 0; i < 200; ++i) {
    V x(20), y(20), z(20);
    const double a = std::exp(n(rng)), b = n(rng);
    for (int k = 0; k < 20; ++k) {
      x[k] = n(rng);
      y[k] = a * x[k] + b;
      z[k] = -a * x[k] + b;
    }
    EXPECT_NEAR(pearson(x, y).coefficient, 1.0, 1e-12);
    EXPECT_NEAR(pearson(x, z).coefficient, -1.0, 1e-12);
    EXPECT_EQ(pearson(x, x).coefficient, 1.0);
  }
}

TEST(Pearson, OracleN50) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0, 1);
  for (int i = 0; i < 50; ++i) {
    V x(50), y(50);
    for (int k = 0; k < 50; ++k) {
      x[k] = n(rng);
      y[k] = 0.3 * x[k] + n(rng);
    }
    const auto got = pearson(x, y);
    const long double r = oracle::pearson(x, y);
    EXPECT_NEAR(got.coefficient, static_cast<double>(r), 1e-12);
    EXPECT_NEAR(got.p_value,
                static_cast<double>(oracle::correlation_p_value(r, 50)), 1e-9);
    EXPECT_EQ(got.n, 50u);
  }
}

TEST(Spearman, Examples) {
  EXPECT_EQ(spearman(V{1, 2, 3, 4}, V{9, 7, 5, 1}).coefficient, -1.0);
  EXPECT_EQ(spearman(V{1, 2, 3}, V{1, 4, 9}).coefficient, 1.0);
  EXPECT_EQ(average_ranks(V{1, 1, 2}), (V{1.5, 1.5, 3}));
  const V x{1, 1, 2}, y{3, 1, 2};
  EXPECT_NEAR(spearman(x, y).coefficient,
              static_cast<double>(oracle::spearman(x, y)), 1e-15);
}

TEST(Spearman, MonotoneInvariance) {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> u(0, 9);
  for (int i = 0; i < 100; ++i) {
    V x(15), y(15), fx(15);
    for (int k = 0; k < 15; ++k) {
      x[k] = u(rng);
      y[k] = u(rng) + 0.5 * x[k];
      fx[k] = std::exp(x[k]) + 3;
    }
    if (x == V(15, x[0]) || y == V(15, y[0])) continue;
    EXPECT_EQ(spearman(x, y).coefficient, spearman(fx, y).coefficient);
  }
}

TEST(Spearman, TiesMatchOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> u(0, 5);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 5 + i % 40;
    V x(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = u(rng);
      y[k] = u(rng);
    }
    if (x == V(n, x[0]) || y == V(n, y[0])) continue;
    const auto got = spearman(x, y);
    const long double rho = oracle::spearman(x, y);
    EXPECT_NEAR(got.coefficient, static_cast<double>(rho), 1e-12);
    EXPECT_NEAR(got.p_value,
                static_cast<double>(oracle::correlation_p_value(rho, n)), 1e-9);
  }
}

TEST(Spearman, ExactPermutationPValue) {
  // Perfect agreement over 5 distinct values: 2 of 120 orderings reach |rho| = 1.
  const V x{1, 2, 3, 4, 5};
  EXPECT_NEAR(spearman_permutation_p_value(x, x), 2.0 / 120.0, 1e-15);
  const auto r = spearman(x, x, SpearmanPValue::kExactPermutation);
  EXPECT_NEAR(r.p_value, 2.0 / 120.0, 1e-15);
  const V big(10, 1.0);
  EXPECT_EQ(code_of([&] { spearman_permutation_p_value(big, big); }),
            ErrorCode::kInvalidArgument);
}

MetricReport report(const std::string& system, V q1, V q2) {
  MetricReport r;
  r.system = system;
  r.per_query["q1"] = {{"m1", q1[0]}, {"m2", q1[1]}};
  r.per_query["q2"] = {{"m1", q2[0]}, {"m2", q2[1]}};
  r.aggregate = {{"m1", (q1[0] + q2[0]) / 2}, {"m2", (q1[1] + q2[1]) / 2}};
  return r;
}

ReportSet reports(int systems, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 1);
  ReportSet out;
  for (int s = 0; s < systems; ++s) {
    const std::string name = "s" + std::to_string(s);
    const double base = s * 0.1;
    out[name] = report(name, {base + noise * n(rng), base * base + noise * n(rng)},
                       {base + noise * n(rng), 1 - base + noise * n(rng)});
  }
  return out;
}

TEST(CorrelationReport, SelfCorrelation) {
  const auto a = reports(13, 0.2, 1);
  const auto sys = correlation_report(a, a, CorrelationLevel::kSystem);
  ASSERT_EQ(sys.rows.size(), 2u);
  for (const auto& row : sys.rows) {
    EXPECT_EQ(row.n, 13u);
    EXPECT_EQ(row.pearson->coefficient, 1.0);
    EXPECT_EQ(row.spearman->coefficient, 1.0);
    EXPECT_TRUE(row.pearson_significant(0.05));
  }
  const auto q = correlation_report(a, a, CorrelationLevel::kQuery);
  ASSERT_EQ(q.rows.size(), 4u);
  EXPECT_EQ(q.rows[0].metric, "m1");
  EXPECT_EQ(q.rows[0].query, "q1");
  for (const auto& row : q.rows) EXPECT_EQ(row.pearson->coefficient, 1.0);
}

TEST(CorrelationReport, MatchesDirectCalls) {
  const auto a = reports(8, 0.2, 1);
  const auto b = reports(8, 0.2, 2);
  const auto sys = correlation_report(a, b, CorrelationLevel::kSystem);
  V x, y;
  for (const auto& [name, r] : a) {
    x.push_back(r.aggregate.at("m2"));
    y.push_back(b.at(name).aggregate.at("m2"));
  }
  EXPECT_EQ(sys.rows[1].metric, "m2");
  EXPECT_EQ(sys.rows[1].pearson->coefficient, pearson(x, y).coefficient);
  EXPECT_EQ(sys.rows[1].spearman->p_value, spearman(x, y).p_value);
}

TEST(CorrelationReport, Mismatches) {
  const auto a = reports(5, 0.1, 1);
  auto b = reports(6, 0.1, 2);
  EXPECT_EQ(code_of([&] { correlation_report(a, b, CorrelationLevel::kSystem); }),
            ErrorCode::kSystemSetMismatch);
  b = reports(5, 0.1, 2);
  b.at("s0").per_query.erase("q2");
  EXPECT_EQ(code_of([&] { correlation_report(a, b, CorrelationLevel::kQuery); }),
            ErrorCode::kQuerySetMismatch);
  const auto small = reports(2, 0.1, 1);
  EXPECT_EQ(code_of([&] {
              correlation_report(small, small, CorrelationLevel::kSystem);
            }),
            ErrorCode::kTooFewSamples);
}

TEST(CorrelationReport, ConstantColumnIsUndefined) {
  auto a = reports(5, 0.1, 1);
  for (auto& [name, r] : a) r.aggregate["m1"] = 0.5;
  const auto sys = correlation_report(a, a, CorrelationLevel::kSystem);
  EXPECT_FALSE(sys.rows[0].pearson);
  EXPECT_FALSE(sys.rows[0].note.empty());
  EXPECT_TRUE(sys.rows[1].pearson);
}

TEST(CorrelationReport, ExcludeMissing) {
  auto a = reports(5, 0.1, 1);
  a.at("s1").missing_queries.insert("q2");
  CorrelationOptions options;
  options.exclude_missing = true;
  const auto q = correlation_report(a, a, CorrelationLevel::kQuery, options);
  for (const auto& row : q.rows) EXPECT_EQ(row.query, "q1");
}

TEST(CorrelationFormats, CsvHeaders) {
  const auto a = reports(5, 0.1, 1);
  const auto sys = correlation_report(a, a, CorrelationLevel::kSystem);
  const auto q = correlation_report(a, a, CorrelationLevel::kQuery);
  const auto csv = correlation_to_csv(sys);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "level,metric,pearson_r,pearson_p,spearman_rho,spearman_p,significant");
  EXPECT_NE(csv.find(",*\n"), std::string::npos);
  const auto qcsv = correlation_to_csv(q);
  EXPECT_NE(qcsv.substr(0, qcsv.find('\n')).find("query"), std::string::npos);
  EXPECT_NE(correlation_to_text(sys).find('*'), std::string::npos);
  EXPECT_FALSE(correlation_to_json(sys, q).empty());
}

}  // namespace
}  // namespace fairgm
