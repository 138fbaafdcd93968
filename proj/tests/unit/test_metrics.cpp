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
#include <numbers>
#include <random>

#include "fairgm/error.hpp"
#include "fairgm/metrics.hpp"
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

TEST(Kl, Examples) {
  const V p{0.2, 0.3, 0.5};
  EXPECT_EQ(kl_divergence(p, p), 0.0);
  EXPECT_NEAR(kl_divergence(V{1, 0}, V{0.5, 0.5}), std::numbers::ln2, 1e-9);
  EXPECT_NEAR(kl_divergence(V{1, 0}, V{0.5, 0.5}, 0.0), std::numbers::ln2, 1e-15);
}

TEST(Kl, Oracle) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto p = oracle::random_distribution(rng, 8, i % 2 == 0);
    const auto q = oracle::random_distribution(rng, 8, i % 3 == 0);
    EXPECT_NEAR(kl_divergence(p, q),
                static_cast<double>(oracle::kl(p, q, kDefaultKlSmoothing)), 1e-12);
  }
}

TEST(Js, Examples) {
  const V p{0.1, 0.9};
  EXPECT_EQ(js_divergence(p, p), 0.0);
  EXPECT_NEAR(js_divergence(V{1, 0}, V{0, 1}), std::numbers::ln2, 1e-15);
}

TEST(Js, SymmetricBoundedAndOracle) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto p = oracle::random_distribution(rng, 1 + i % 10 + 1, true);
    const auto q = oracle::random_distribution(rng, p.size(), true);
    const double a = js_divergence(p, q);
    EXPECT_EQ(a, js_divergence(q, p));
    EXPECT_LE(a, std::numbers::ln2 + 1e-12);
    EXPECT_GE(a, -1e-12);
    EXPECT_NEAR(a, static_cast<double>(oracle::js(p, q)), 1e-12);
  }
}

TEST(Divergence, InputChecks) {
  EXPECT_EQ(code_of([] { js_divergence(V{1, 0}, V{1, 0, 0}); }),
            ErrorCode::kLengthMismatch);
  EXPECT_EQ(code_of([] { kl_divergence(V{0.6, 0.6}, V{0.5, 0.5}); }),
            ErrorCode::kNotADistribution);
  EXPECT_EQ(code_of([] { js_divergence(V{1.5, -0.5}, V{0.5, 0.5}); }),
            ErrorCode::kNotADistribution);
}

struct Fixture {
  SchemePtr scheme = make_scheme("s", {"a", "b"});
  GroupMembershipTable table;
  Fixture() {
    table.add_scheme(scheme);
    table.insert("d1", MembershipVector::one_hot(scheme, 0));
    table.insert("d2", MembershipVector::one_hot(scheme, 1));
    table.insert("d3", MembershipVector::one_hot(scheme, 0));
  }
};

Ranking ranking(std::vector<std::string> docs, std::string query = "q",
                std::string system = "sys") {
  std::vector<RankedDocument> entries;
  double score = static_cast<double>(docs.size());
  for (auto& d : docs) entries.push_back({std::move(d), score--});
  return Ranking(std::move(query), std::move(system), std::move(entries));
}

TEST(Awrf, ZeroWhenExposureMatchesTarget) {
  Fixture f;
  const auto model = AttentionModel::geometric(0.5);
  const auto r = ranking({"d1", "d2", "d3"});
  const auto target = cumulative_exposure(r, f.table, "s", model,
                                          MissingPolicy::kReject).normalized;
  EXPECT_EQ(awrf(r, f.table, "s", model, target, Divergence::kJs), 0.0);
  EXPECT_EQ(awrf(r, f.table, "s", model, target, Divergence::kKl), 0.0);
}

TEST(Awrf, ThreeDocumentsAgainstUniform) {
  Fixture f;
  const auto model = AttentionModel::geometric(0.5);
  const auto target = target_uniform(f.scheme, false);
  const double got = awrf(ranking({"d1", "d2", "d3"}), f.table, "s", model, target,
                          Divergence::kJs);
  const V eps{0.625 / 0.875, 0.25 / 0.875};
  EXPECT_NEAR(got, static_cast<double>(oracle::js(eps, V{0.5, 0.5})), 1e-12);
}

TEST(Awrf, SingleGroupAgainstUniform) {
  Fixture f;
  const double got = awrf(ranking({"d1", "d3"}), f.table, "s",
                          AttentionModel::geometric(0.5),
                          target_uniform(f.scheme, false), Divergence::kJs);
  // JS((1,0), (1/2,1/2)) with mixture (3/4, 1/4).
  const double closed = 0.5 * std::log(1.0 / 0.75) +
                        0.5 * (0.5 * std::log(0.5 / 0.75) + 0.5 * std::log(0.5 / 0.25));
  EXPECT_NEAR(got, closed, 1e-15);
}

TEST(Awrf, ScaleInvariance) {
  Fixture f;
  const auto target = target_uniform(f.scheme, false);
  const auto r = ranking({"d1", "d2", "d3"});
  // Raw exposure (2, 1) under unit weights; only its proportions matter.
  const double got = awrf(r, f.table, "s", AttentionModel::uniform(3), target,
                          Divergence::kKl);
  const double want = static_cast<double>(
      oracle::kl(V{2.0 / 3.0, 1.0 / 3.0}, V{0.5, 0.5}, kDefaultKlSmoothing));
  EXPECT_NEAR(got, want, 1e-15);
  const double top2 = awrf(ranking({"d1", "d2"}), f.table, "s",
                           AttentionModel::uniform(2), target, Divergence::kKl);
  const double top1000 = awrf(ranking({"d1", "d2"}), f.table, "s",
                              AttentionModel::uniform(1000), target,
                              Divergence::kKl);
  EXPECT_EQ(top2, top1000);
}

TEST(EeMetrics, Examples) {
  auto s = make_scheme("s", {"a", "b"});
  const ExposureVector g{s, {1, 0}, false};
  const ExposureVector gs{s, {0.5, 0.5}, false};
  const auto m = ee_metrics(g, gs);
  EXPECT_EQ(m.loss, 0.5);
  EXPECT_EQ(m.disparity, 1.0);
  EXPECT_EQ(m.relevance, 1.0);
  EXPECT_EQ(ee_metrics(gs, gs).loss, 0.0);
  const ExposureVector three{make_scheme("t", {"a", "b", "c"}), {1, 0, 0}, false};
  EXPECT_EQ(code_of([&] { ee_metrics(g, three); }), ErrorCode::kLengthMismatch);
}

TEST(EeMetrics, Identity) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  auto s = make_scheme("s", {"a", "b", "c", "d", "e"});
  for (int i = 0; i < 2000; ++i) {
    ExposureVector g{s, V(5), false}, gs{s, V(5), false};
    for (int k = 0; k < 5; ++k) {
      g.mass[k] = u(rng);
      gs.mass[k] = u(rng);
    }
    const auto m = ee_metrics(g, gs);
    double norm = 0;
    for (double x : gs.mass) norm += x * x;
    EXPECT_NEAR(m.loss, m.disparity + norm - m.relevance, 1e-12);
  }
}

// A small collection: two schemes, three systems, two queries.
struct Collection {
  SchemePtr gender = make_scheme("gender", {"m", "f", "u"}, 2);
  SchemePtr geo = make_scheme("geo", {"n", "s"});
  GroupMembershipTable table;
  Qrels qrels;
  RunSet runs;
  Collection() {
    table.add_scheme(gender);
    table.add_scheme(geo);
    const char* docs[] = {"a", "b", "c", "d", "e", "f"};
    for (int i = 0; i < 6; ++i) {
      table.insert(docs[i], MembershipVector::one_hot(gender, i % 3));
      table.insert(docs[i], MembershipVector::one_hot(geo, (i / 3) % 2));
    }
    for (const char* q : {"q1", "q2"}) {
      qrels.add(q, "a", 1);
      qrels.add(q, "b", 2);
      qrels.add(q, "e", 1);
      qrels.add(q, "f", 0);
    }
    runs.add(ranking({"a", "b", "c", "d"}, "q1", "s1"));
    runs.add(ranking({"e", "f", "a"}, "q2", "s1"));
    runs.add(ranking({"d", "c", "b", "a"}, "q1", "s2"));
    runs.add(ranking({"b", "e"}, "q2", "s2"));
    runs.add(ranking({"f", "a"}, "q1", "s3"));
  }
  std::vector<std::string> schemes() const { return {"gender", "geo"}; }
};

TEST(EvaluateRunset, PerQueryValuesMatchDirectCalls) {
  Collection c;
  EvaluationConfig config;
  const auto schemes = c.schemes();
  const auto reports = evaluate_runset(c.runs, &c.qrels, c.table, schemes, config);
  ASSERT_EQ(reports.size(), 3u);
  const auto model = config.attention;
  const MembershipLookup gender(c.table, "gender", config.fallback);
  const auto target = target_from_qrels(c.qrels, "q1", gender, config.relevance);
  const double direct = awrf(*c.runs.find("s1", "q1"), gender, model, target,
                             Divergence::kJs);
  EXPECT_EQ(reports.at("s1").per_query.at("q1").at("awrf:gender"), direct);

  const MembershipLookup overall(c.table, schemes, config.fallback);
  const auto overall_target =
      target_from_qrels(c.qrels, "q1", overall, config.relevance);
  EXPECT_EQ(reports.at("s1").per_query.at("q1").at("awrf:overall"),
            awrf(*c.runs.find("s1", "q1"), overall, model, overall_target,
                 Divergence::kJs));
  const auto& s1 = reports.at("s1");
  EXPECT_EQ(s1.aggregate.at("awrf:geo"),
            (s1.per_query.at("q1").at("awrf:geo") +
             s1.per_query.at("q2").at("awrf:geo")) / 2);
}

TEST(EvaluateRunset, MissingQueryScoresWorstCase) {
  Collection c;
  EvaluationConfig config;
  const auto schemes = c.schemes();
  auto reports = evaluate_runset(c.runs, &c.qrels, c.table, schemes, config);
  const auto& s3 = reports.at("s3");
  EXPECT_EQ(s3.missing_queries, (std::set<std::string>{"q2"}));
  EXPECT_EQ(s3.per_query.at("q2").at("awrf:gender"), std::numbers::ln2);

  config.complement = true;
  reports = evaluate_runset(c.runs, &c.qrels, c.table, schemes, config);
  EXPECT_EQ(reports.at("s3").per_query.at("q2").at("awrf_complement:gender"), 0.0);
  const double v = reports.at("s1").per_query.at("q1").at("awrf_complement:geo");
  EXPECT_GT(v, 0.0);
  EXPECT_LE(v, 1.0);

  config.complement = false;
  config.divergence = Divergence::kKl;
  reports = evaluate_runset(c.runs, &c.qrels, c.table, schemes, config);
  const MembershipLookup gender(c.table, "gender", config.fallback);
  const auto target = target_from_qrels(c.qrels, "q2", gender, config.relevance);
  double worst = 0;
  for (std::size_t g = 0; g < 3; ++g) {
    V e(3, 0.0);
    e[g] = 1;
    worst = std::max(worst, kl_divergence(e, target.mass));
  }
  EXPECT_EQ(reports.at("s3").per_query.at("q2").at("awrf:gender"), worst);
}

TEST(EvaluateRunset, ConfigErrors) {
  Collection c;
  EvaluationConfig config;
  std::vector<std::string> bad{"gender", "species"};
  EXPECT_EQ(code_of([&] { evaluate_runset(c.runs, &c.qrels, c.table, bad, config); }),
            ErrorCode::kConfigError);
  const auto schemes = c.schemes();
  EXPECT_EQ(code_of([&] { evaluate_runset(c.runs, nullptr, c.table, schemes, config); }),
            ErrorCode::kConfigError);
  config.complement = true;
  config.divergence = Divergence::kKl;
  EXPECT_EQ(code_of([&] { evaluate_runset(c.runs, &c.qrels, c.table, schemes, config); }),
            ErrorCode::kConfigError);
}

TEST(EvaluateRunset, UniformAndFixedTargets) {
  Collection c;
  EvaluationConfig config;
  config.target = TargetMode::kUniform;
  const std::vector<std::string> geo{"geo"};
  const auto uniform = evaluate_runset(c.runs, nullptr, c.table, geo, config);
  config.target = TargetMode::kFixed;
  config.fixed_targets["geo"] = {0.5, 0.5};
  const auto fixed = evaluate_runset(c.runs, nullptr, c.table, geo, config);
  EXPECT_EQ(uniform, fixed);
  EXPECT_FALSE(uniform.at("s1").per_query.at("q1").count("awrf:overall"));
}

TEST(EvaluateRunset, ExpectedExposureMetrics) {
  Collection c;
  EvaluationConfig config;
  config.expected_exposure = true;
  const std::vector<std::string> gender{"gender"};
  const auto reports = evaluate_runset(c.runs, &c.qrels, c.table, gender, config);
  const auto& row = reports.at("s2").per_query.at("q1");
  const MembershipLookup lookup(c.table, "gender", config.fallback);
  const Ranking* r = c.runs.find("s2", "q1");
  const auto gamma = expected_group_exposure(std::span<const Ranking* const>(&r, 1),
                                             lookup, config.attention);
  const auto star = target_group_exposure(c.qrels, "q1", lookup, config.attention);
  const auto m = ee_metrics(gamma, star);
  EXPECT_EQ(row.at("ee_l:gender"), m.loss);
  EXPECT_EQ(row.at("ee_d:gender"), m.disparity);
  EXPECT_EQ(row.at("ee_r:gender"), m.relevance);
}

TEST(EvaluateRunset, SequenceSeparatorGroupsRankings) {
  Collection c;
  RunSet runs;
  runs.add(ranking({"a", "b"}, "q1#0", "s"));
  runs.add(ranking({"b", "a"}, "q1#1", "s"));
  EvaluationConfig config;
  config.expected_exposure = true;
  config.sequence_separator = '#';
  const std::vector<std::string> gender{"gender"};
  const auto reports = evaluate_runset(runs, &c.qrels, c.table, gender, config);
  const auto& row = reports.at("s").per_query.at("q1");
  const MembershipLookup lookup(c.table, "gender", config.fallback);
  const auto& systems = runs.systems().at("s");
  const Ranking* seq[] = {&systems.at("q1#0"), &systems.at("q1#1")};
  const auto gamma = expected_group_exposure(seq, lookup, config.attention);
  EXPECT_EQ(row.at("ee_d:gender"), ee_metrics(gamma, gamma).disparity);
}

TEST(EvaluateRunset, ThreadCountDoesNotMatter) {
  Collection c;
  EvaluationConfig config;
  config.expected_exposure = true;
  const auto schemes = c.schemes();
  const auto serial = evaluate_runset(c.runs, &c.qrels, c.table, schemes, config);
  config.threads = 3;
  EXPECT_EQ(evaluate_runset(c.runs, &c.qrels, c.table, schemes, config), serial);
}

TEST(Reports, JsonRoundTripAndCsvShape) {
  Collection c;
  EvaluationConfig config;
  const auto schemes = c.schemes();
  const auto reports = evaluate_runset(c.runs, &c.qrels, c.table, schemes, config);
  EXPECT_EQ(reports_from_json(reports_to_json(reports)), reports);
  const auto csv = reports_to_csv(reports);
  EXPECT_EQ(csv.rfind("system,query,metric,value\n", 0), 0u);
  // 3 systems x 2 queries x 3 metrics.
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 * 2 * 3);
}

}  // namespace
}  // namespace fairgm
