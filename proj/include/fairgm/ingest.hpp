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
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairgm/core.hpp"

namespace fairgm {

// Parsers for TREC-style run and qrels files and for group-membership
// annotation tables. All parsers report the 1-based line number of the first
// offending line through Error::line().

// `<qid> Q0 <docid> <rank> <score> <tag>`, blank-separated. Each ranking is
// ordered by the rank field; the score is kept but never reorders.
RunSet parse_run(std::istream& in);
void write_run(std::ostream& out, const RunSet& runs);
std::string write_run(const RunSet& runs);

// `<qid> <iter> <docid> <grade>`; the iteration field is ignored.
Qrels parse_qrels(std::istream& in);
void write_qrels(std::ostream& out, const Qrels& qrels);
std::string write_qrels(const Qrels& qrels);

enum class AnnotationFormat { kTsv, kJsonl };
AnnotationFormat parse_annotation_format(std::string_view text);

// One parsed annotation line before normalization.
struct AnnotationRecord {
  std::string doc_id;
  std::string scheme;
  std::vector<std::pair<std::string, double>> weights;
};

// TSV: `<docid>\t<scheme>\t<label>:<weight>[,<label>:<weight>...]`.
// JSONL: `{"doc": ..., "scheme": ..., "weights": {label: weight}}`.
// Every scheme in `schemes` is registered in the result, even without rows.
GroupMembershipTable parse_annotations(std::istream& in,
                                       AnnotationFormat format,
                                       std::span<const SchemePtr> schemes,
                                       Provenance provenance = Provenance::kHuman);
// Rows grouped by scheme name, then sorted by document id; labels in scheme
// order; zero weights omitted.
void write_annotations(std::ostream& out, const GroupMembershipTable& table,
                       AnnotationFormat format);
std::string write_annotations(const GroupMembershipTable& table,
                              AnnotationFormat format);

struct SamplePlan {
  std::string scheme;
  std::size_t train_per_group = 0;
  std::size_t test_per_group = 0;
  std::uint64_t seed = 0;
};

struct SampleSplit {
  std::vector<std::string> train;  // sorted
  std::vector<std::string> test;   // sorted
};

// Draws the requested number of training and test documents from every group
// of the plan's scheme. A document belongs to the argmax of its membership
// vector (ties to the lowest index). Throws InsufficientDocuments naming the
// first group that cannot satisfy the plan.
SampleSplit stratified_sample(const GroupMembershipTable& table,
                              const SamplePlan& plan);

// File helpers; throw IoError naming the path when it cannot be opened.
std::string read_file(const std::filesystem::path& path);
RunSet load_run_file(const std::filesystem::path& path);
Qrels load_qrels_file(const std::filesystem::path& path);
GroupMembershipTable load_annotation_file(const std::filesystem::path& path,
                                          AnnotationFormat format,
                                          std::span<const SchemePtr> schemes,
                                          Provenance provenance);

}  // namespace fairgm
