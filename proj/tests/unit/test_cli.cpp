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

#include <filesystem>
#include <set>
#include <sstream>

#include "fairgm/cli.hpp"
#include "json.hpp"

namespace fairgm::cli {
namespace {

namespace fs = std::filesystem;

const std::string kFixtures = FAIRGM_FIXTURES "/valid/";

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() /
              ("fairgm_cli_" + name + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& child) const {
    return (path_ / child).string();
  }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) { return read_file(path); }

std::size_t lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

TEST(Cli, MinimalEvaluate) {
  TempDir dir("minimal");
  const auto r = run({"evaluate", "--run", kFixtures + "minimal_run.txt", "--qrels",
                      kFixtures + "minimal_qrels.txt", "--annotations",
                      kFixtures + "minimal_annotations.tsv", "--scheme-def",
                      "gender:male,female,non-binary,unknown", "--out", dir / "out"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(dir / "out/metrics.csv");
  // Header plus one row for (only, q1, awrf:gender).
  EXPECT_EQ(lines(csv), 2u);
  EXPECT_NE(csv.find("only,q1,awrf:gender,"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out/summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "out/metrics.json"));
}

TEST(Cli, EvaluateIsDeterministic) {
  TempDir dir("determinism");
  const std::vector<std::string> base{"evaluate", "--config",
                                      kFixtures + "experiment.json"};
  auto args = base;
  args.insert(args.end(), {"--out", dir / "a"});
  ASSERT_EQ(run(args).code, 0);
  args = base;
  args.insert(args.end(), {"--out", dir / "b"});
  ASSERT_EQ(run(args).code, 0);
  args = base;
  args.insert(args.end(), {"--out", dir / "c", "--threads", "4"});
  ASSERT_EQ(run(args).code, 0);
  for (const char* f : {"metrics.csv", "summary.csv", "metrics.json"}) {
    EXPECT_EQ(slurp(dir / "a/" + f), slurp(dir / "b/" + f)) << f;
    EXPECT_EQ(slurp(dir / "a/" + f), slurp(dir / "c/" + f)) << f;
  }
}

TEST(Cli, EvaluateMatchesLibrary) {
  TempDir dir("library");
  ASSERT_EQ(run({"evaluate", "--config", kFixtures + "experiment.json", "--out",
                 dir / "out"})
                .code,
            0);
  const auto config = load_experiment_config(kFixtures + "experiment.json");
  const auto runs = load_run_file(config.runs[0]);
  const auto qrels = load_qrels_file(*config.qrels);
  const auto table = load_annotation_file(*config.annotations, config.annotation_format,
                                          config.schemes, Provenance::kHuman);
  const std::vector<std::string> schemes{"gender", "geo"};
  const auto reports =
      evaluate_runset(runs, &qrels, table, schemes, config.evaluation);
  EXPECT_EQ(slurp(dir / "out/metrics.csv"), reports_to_csv(reports));
  EXPECT_EQ(reports.at("sysE").missing_queries, (std::set<std::string>{"q3"}));
}

TEST(Cli, MissingQrelsNamesPath) {
  TempDir dir("missing");
  const std::string missing = dir / "nowhere/qrels.txt";
  const auto r = run({"evaluate", "--config", kFixtures + "experiment.json",
                      "--qrels", missing, "--out", dir / "out"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(missing), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, FailedRunLeavesNoReports) {
  TempDir dir("partial");
  const auto r = run({"evaluate", "--config", kFixtures + "experiment.json",
                      "--fallback", "reject", "--out", dir / "out"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("MissingDocument"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "out/metrics.csv"));
}

TEST(Cli, CompareIdenticalSources) {
  TempDir dir("identical");
  const auto r = run({"compare", "--config", kFixtures + "experiment.json",
                      "--annotations-b", kFixtures + "annotations_a.tsv", "--out",
                      dir / "out"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir / "out/correlation.json"));
  std::size_t rows = 0;
  for (const char* level : {"system_level", "query_level"}) {
    for (const auto& row : j[level]) {
      EXPECT_EQ(row["pearson_r"].get<double>(), 1.0);
      EXPECT_EQ(row["spearman_rho"].get<double>(), 1.0);
      EXPECT_TRUE(row["pearson_significant"].get<bool>());
      ++rows;
    }
  }
  EXPECT_GT(rows, 0u);
  const auto csv = slurp(dir / "out/correlation_system.csv");
  EXPECT_EQ(lines(csv) - 1, static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '*')));
}

TEST(Cli, CompareMatchesLibrary) {
  TempDir dir("compare");
  ASSERT_EQ(run({"compare", "--config", kFixtures + "experiment.json", "--out",
                 dir / "out"})
                .code,
            0);
  const auto config = load_experiment_config(kFixtures + "experiment.json");
  const auto runs = load_run_file(config.runs[0]);
  const auto qrels = load_qrels_file(*config.qrels);
  const auto a = load_annotation_file(*config.annotations, config.annotation_format,
                                      config.schemes, Provenance::kHuman);
  const auto b = load_annotation_file(*config.annotations_b, config.annotation_format,
                                      config.schemes, Provenance::kModel);
  const std::vector<std::string> schemes{"gender", "geo"};
  const auto ra = evaluate_runset(runs, &qrels, a, schemes, config.evaluation);
  const auto rb = evaluate_runset(runs, &qrels, b, schemes, config.evaluation);
  EXPECT_EQ(slurp(dir / "out/correlation_system.csv"),
            correlation_to_csv(correlation_report(ra, rb, CorrelationLevel::kSystem)));
  EXPECT_EQ(slurp(dir / "out/correlation_query.csv"),
            correlation_to_csv(correlation_report(ra, rb, CorrelationLevel::kQuery)));
}

TEST(Cli, CompareSystemMismatch) {
  TempDir dir("mismatch");
  ASSERT_EQ(run({"evaluate", "--config", kFixtures + "experiment.json", "--out",
                 dir / "all"})
                .code,
            0);
  ASSERT_EQ(run({"evaluate", "--config", kFixtures + "experiment.json", "--run",
                 kFixtures + "runs_two_systems.txt", "--out", dir / "two"})
                .code,
            0);
  const auto r = run({"compare", "--reports-a", dir / "all/metrics.json",
                      "--reports-b", dir / "two/metrics.json", "--out", dir / "out"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("SystemSetMismatch"), std::string::npos);
}

TEST(Cli, SweepShape) {
  TempDir dir("sweep");
  const auto r = run({"sweep", "--queries", "4", "--docs", "80", "--systems", "6",
                      "--levels", "0.25,0.5,0.75,1.0", "--trials", "3", "--out",
                      dir / "out"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(dir / "out/sweep.csv");
  EXPECT_EQ(lines(csv), 1u + 12u + 4u);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.rfind("1,", 0) == 0) {
      EXPECT_EQ(line.substr(line.find(',', 2) + 1, 2), "1,") << line;
    }
  }
}

TEST(Cli, SampleCounts) {
  TempDir dir("sample");
  ASSERT_EQ(run({"gen-testbed", "--queries", "4", "--docs", "1000", "--out",
                 dir / "bed"})
                .code,
            0);
  const std::vector<std::string> base{
      "sample", "--config", dir / "bed/experiment.json", "--train", "500", "--test",
      "100"};
  auto args = base;
  args.insert(args.end(), {"--out", dir / "s1", "--seed", "1"});
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(lines(slurp(dir / "s1/train.txt")), 2000u);
  EXPECT_EQ(lines(slurp(dir / "s1/test.txt")), 400u);
  args = base;
  args.insert(args.end(), {"--out", dir / "s2", "--seed", "2"});
  ASSERT_EQ(run(args).code, 0);
  EXPECT_NE(slurp(dir / "s1/train.txt"), slurp(dir / "s2/train.txt"));
  EXPECT_EQ(lines(slurp(dir / "s2/train.txt")), 2000u);

  args = base;
  args[4] = "5000";
  args.insert(args.end(), {"--out", dir / "s3"});
  const auto r = run(args);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("InsufficientDocuments"), std::string::npos);
}

TEST(Cli, SampleNeverOverlaps) {
  TempDir dir("overlap");
  ASSERT_EQ(run({"gen-testbed", "--queries", "2", "--docs", "100", "--out",
                 dir / "bed"})
                .code,
            0);
  for (int seed = 0; seed < 100; ++seed) {
    const auto out = dir / ("s" + std::to_string(seed));
    ASSERT_EQ(run({"sample", "--config", dir / "bed/experiment.json", "--train",
                   "20", "--test", "10", "--seed", std::to_string(seed), "--out",
                   out})
                  .code,
              0);
    std::set<std::string> train;
    std::istringstream t(slurp(out + "/train.txt"));
    for (std::string id; std::getline(t, id);) train.insert(id);
    std::istringstream s(slurp(out + "/test.txt"));
    for (std::string id; std::getline(s, id);) EXPECT_FALSE(train.count(id));
  }
}

TEST(Cli, CostExamples) {
  auto r = run({"cost", "--docs", "6000000"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("total\t2010 USD"), std::string::npos);
  r = run({"cost", "--docs", "6000000", "--json"});
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GT(j["total"].get<double>(), 2000.0);
  EXPECT_EQ(j["total"].get<double>(), 2010.0);
  r = run({"cost", "--docs", "1000", "--tokens", "512", "--rate", "0.5", "--json"});
  EXPECT_EQ(nlohmann::json::parse(r.out)["total"].get<double>(), 0.256);
  r = run({"cost", "--docs", "0", "--model", "gpt-3.5-turbo-finetuned", "--json"});
  EXPECT_EQ(nlohmann::json::parse(r.out)["total"].get<double>(), 32.16);
}

TEST(Cli, FixedTargetFile) {
  TempDir dir("fixed");
  const auto r = run({"evaluate", "--config", kFixtures + "experiment.json",
                      "--target", kFixtures + "target.json", "--out", dir / "out"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(dir / "out/metrics.csv").find("awrf:overall"), std::string::npos);
}

TEST(Cli, ConfigAndUsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"evaluate", "--bogus"}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_THROW(parse_experiment_config(R"({"runz": []})", {}), Error);
  EXPECT_THROW(parse_experiment_config(R"({"divergence": "hellinger"})", {}), Error);
  EXPECT_THROW(parse_experiment_config(R"({"attention": {"model": "geometric", "patience": 1.5}})", {}),
               Error);
  const auto c = parse_experiment_config(
      R"({"seed": 5, "sweep": {"seed": 9}, "attention": {"model": "log", "cutoff": 10}})",
      "/base");
  EXPECT_EQ(c.testbed.seed, 5u);
  EXPECT_EQ(c.sweep.seed, 9u);
  EXPECT_EQ(c.evaluation.attention.cutoff(), 10u);
}

TEST(Cli, SchemeDeclaration) {
  const auto s = parse_scheme_declaration("gender:male,female,unknown");
  EXPECT_EQ(s->name(), "gender");
  EXPECT_EQ(s->size(), 3u);
  EXPECT_EQ(s->unknown_index(), 2u);
  EXPECT_FALSE(parse_scheme_declaration("geo:a,b")->unknown_index());
  EXPECT_THROW(parse_scheme_declaration("nocolon"), Error);
}

}  // namespace
}  // namespace fairgm::cli
