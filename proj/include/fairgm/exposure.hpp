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
#include <string_view>
#include <vector>

#include "fairgm/core.hpp"

namespace fairgm {

// Per-rank user attention. Ranks are 1-based; ranks past the cutoff receive
// no attention.
class AttentionModel {
 public:
  enum class Kind { kGeometric, kLogDiscount, kUniform };

  // weight(rank) = p * (1 - p)^(rank - 1), p in (0, 1).
  static AttentionModel geometric(double patience,
                                  std::optional<std::size_t> cutoff = {});
  // weight(rank) = 1 / log2(rank + 1).
  static AttentionModel log_discount(std::optional<std::size_t> cutoff = {});
  // weight(rank) = 1 for rank <= top_k.
  static AttentionModel uniform(std::size_t top_k);

  Kind kind() const noexcept { return kind_; }
  double patience() const noexcept { return patience_; }
  std::optional<std::size_t> cutoff() const noexcept { return cutoff_; }

  std::size_t retained(std::size_t n) const noexcept;
  double weight(std::size_t rank) const;
  std::string describe() const;

 private:
  AttentionModel(Kind kind, double patience, std::optional<std::size_t> cutoff)
      : kind_(kind), patience_(patience), cutoff_(cutoff) {}

  Kind kind_;
  double patience_;
  std::optional<std::size_t> cutoff_;
};

// Weights for ranks 1..min(n, cutoff).
std::vector<double> attention_weights(const AttentionModel& model,
                                      std::size_t n);

struct ExposureVector {
  SchemePtr scheme;
  std::vector<double> mass;
  bool normalized = false;

  double total() const;
  // Throws ZeroMass when the total is zero.
  ExposureVector to_normalized() const;
};

struct CumulativeExposure {
  ExposureVector raw;
  ExposureVector normalized;
};

// Resolves membership weights for one scheme, or for the product of several
// schemes (row-major, first scheme outermost), applying the missing-document
// policy to each component.
class MembershipLookup {
 public:
  MembershipLookup(const GroupMembershipTable& table, std::string_view scheme,
                   MissingPolicy fallback);
  MembershipLookup(const GroupMembershipTable& table,
                   std::vector<std::string> schemes, MissingPolicy fallback);

  const SchemePtr& scheme() const noexcept { return scheme_; }
  // Adds `scale * GM_d` into `accum`.
  void accumulate(const std::string& doc_id, double scale,
                  std::span<double> accum) const;
  MembershipVector membership(const std::string& doc_id) const;

 private:
  const GroupMembershipTable* table_;
  std::vector<SchemePtr> components_;
  SchemePtr scheme_;
  MissingPolicy fallback_;
};

CumulativeExposure cumulative_exposure(const Ranking& ranking,
                                       const MembershipLookup& lookup,
                                       const AttentionModel& model);
CumulativeExposure cumulative_exposure(const Ranking& ranking,
                                       const GroupMembershipTable& table,
                                       std::string_view scheme,
                                       const AttentionModel& model,
                                       MissingPolicy fallback);

enum class RelevanceMode { kBinary, kGraded };
RelevanceMode parse_relevance_mode(std::string_view text);

// Mean membership of the query's relevant (grade > 0) documents; grade
// weighted in graded mode. Normalized.
ExposureVector target_from_qrels(const Qrels& qrels, std::string_view query_id,
                                 const MembershipLookup& lookup,
                                 RelevanceMode mode);
ExposureVector target_from_qrels(const Qrels& qrels, std::string_view query_id,
                                 const GroupMembershipTable& table,
                                 std::string_view scheme, RelevanceMode mode,
                                 MissingPolicy fallback = MissingPolicy::kUniform);
// Same average taken over the relevant documents of every query.
ExposureVector target_from_qrels_corpus(const Qrels& qrels,
                                        const MembershipLookup& lookup,
                                        RelevanceMode mode);

ExposureVector target_uniform(const SchemePtr& scheme, bool exclude_unknown);

// Mean raw cumulative exposure over the rankings of the sequence.
ExposureVector expected_group_exposure(const RankingSequence& sequence,
                                       const MembershipLookup& lookup,
                                       const AttentionModel& model);
// Same mean over rankings held elsewhere; `rankings` must be non-empty.
ExposureVector expected_group_exposure(std::span<const Ranking* const> rankings,
                                       const MembershipLookup& lookup,
                                       const AttentionModel& model);
ExposureVector expected_group_exposure(const RankingSequence& sequence,
                                       const GroupMembershipTable& table,
                                       std::string_view scheme,
                                       const AttentionModel& model,
                                       MissingPolicy fallback);

// Per-document target exposure under equal exposure within a relevance grade:
// relevant documents sorted by grade descending occupy ranks 1..m and every
// document of a grade band receives the mean attention of the band's ranks.
// Unjudged and grade-0 documents receive nothing. Aggregated through GM.
std::vector<double> target_document_exposure(std::span<const int> grades,
                                             const AttentionModel& model);
ExposureVector target_group_exposure(const Qrels& qrels,
                                     std::string_view query_id,
                                     const MembershipLookup& lookup,
                                     const AttentionModel& model);
ExposureVector target_group_exposure(const Qrels& qrels,
                                     std::string_view query_id,
                                     const GroupMembershipTable& table,
                                     std::string_view scheme,
                                     const AttentionModel& model,
                                     MissingPolicy fallback);

}  // namespace fairgm
