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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairgm/ingest.hpp"
#include "fairgm/metrics.hpp"
#include "fairgm/simulate.hpp"
#include "fairgm/stats.hpp"

namespace fairgm::cli {

// Everything a command needs, loaded from a JSON config file and then
// overridden by command-line flags. Relative paths in the file resolve
// against the file's directory.
struct ExperimentConfig {
  std::vector<std::filesystem::path> runs;
  std::optional<std::filesystem::path> qrels;
  std::optional<std::filesystem::path> annotations;
  std::optional<std::filesystem::path> annotations_b;
  std::optional<std::filesystem::path> reports_a;
  std::optional<std::filesystem::path> reports_b;
  std::optional<std::filesystem::path> target_file;
  std::optional<std::filesystem::path> rates;
  AnnotationFormat annotation_format = AnnotationFormat::kTsv;
  std::vector<SchemePtr> schemes;
  // Schemes to evaluate; empty means all declared schemes.
  std::vector<std::string> evaluate_schemes;
  EvaluationConfig evaluation;
  CorrelationOptions correlation;
  TestbedConfig testbed;
  SweepConfig sweep;
  SamplePlan sample;
  std::uint64_t seed = 42;
  unsigned threads = 1;
  std::filesystem::path out = "out";
};

// Parses a config document. Throws ConfigError on unknown keys or values.
ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// `name:label,label,...`; a label equal to `unknown_label` becomes the
// scheme's unknown group.
SchemePtr parse_scheme_declaration(std::string_view text,
                                   std::string_view unknown_label = "unknown");

// Fixed target distributions: {"scheme": [w, ...]} or
// {"scheme": {"label": w, ...}}.
std::map<std::string, std::vector<double>> parse_target_file(
    std::string_view json_text, std::span<const SchemePtr> schemes);

// Files produced by a command. Nothing touches the output directory until
// commit(), which writes every file to a temporary name and renames it into
// place; on failure all files of the set are removed.
class OutputSet {
 public:
  void add(std::string name, std::string content);
  void commit(const std::filesystem::path& dir) const;
  const std::map<std::string, std::string>& files() const noexcept {
    return files_;
  }

 private:
  std::map<std::string, std::string> files_;
};

// Entry point shared by the executable and the tests. Returns the process
// exit code: 0 on success, 1 on any error (reported on `err`).
int run_cli(std::span<const std::string> args, std::ostream& out,
            std::ostream& err);

}  // namespace fairgm::cli
