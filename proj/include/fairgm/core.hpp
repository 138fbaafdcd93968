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
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fairgm/error.hpp"

namespace fairgm {

// A fairness category with an ordered list of group labels. The "unknown"
// label, when present, is an ordinary group at `unknown_index`.
class GroupScheme {
 public:
  GroupScheme(std::string name, std::vector<std::string> labels,
              std::optional<std::size_t> unknown_index = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::optional<std::size_t> unknown_index() const noexcept {
    return unknown_index_;
  }
  std::optional<std::size_t> index_of(std::string_view label) const;

  bool operator==(const GroupScheme&) const = default;

 private:
  std::string name_;
  std::vector<std::string> labels_;
  std::optional<std::size_t> unknown_index_;
};

using SchemePtr = std::shared_ptr<const GroupScheme>;

SchemePtr make_scheme(std::string name, std::vector<std::string> labels,
                      std::optional<std::size_t> unknown_index = std::nullopt);

// Scheme whose groups are the cartesian product of `a` and `b`, row-major by
// the index into `a`. Labels are joined with '&'.
SchemePtr product_scheme(const GroupScheme& a, const GroupScheme& b);

// A distribution over the groups of one scheme. Only constructible through
// normalize() and the named factories, so every instance sums to 1.
class MembershipVector {
 public:
  static MembershipVector one_hot(SchemePtr scheme, std::size_t group);
  static MembershipVector uniform(SchemePtr scheme);

  const SchemePtr& scheme() const noexcept { return scheme_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::size_t size() const noexcept { return weights_.size(); }
  // Lowest index among the maximal entries.
  std::size_t argmax() const noexcept;

  bool operator==(const MembershipVector& other) const;

 private:
  MembershipVector(SchemePtr scheme, std::vector<double> weights)
      : scheme_(std::move(scheme)), weights_(std::move(weights)) {}

  friend MembershipVector normalize(std::span<const double>, SchemePtr);
  friend MembershipVector intersect_schemes(const MembershipVector&,
                                            const MembershipVector&,
                                            SchemePtr);

  SchemePtr scheme_;
  std::vector<double> weights_;
};

// Scales non-negative weights to sum to 1. Vectors already summing to 1 up to
// rounding are returned bit-for-bit, so normalize() is idempotent.
MembershipVector normalize(std::span<const double> raw, SchemePtr scheme);

MembershipVector intersect_schemes(const MembershipVector& a,
                                   const MembershipVector& b);
// Same, reusing a product scheme built once by product_scheme().
MembershipVector intersect_schemes(const MembershipVector& a,
                                   const MembershipVector& b,
                                   SchemePtr product);

enum class MissingPolicy { kAllUnknown, kUniform, kReject };
enum class Provenance { kHuman, kModel, kSynthetic };

std::string_view to_string(MissingPolicy policy);
MissingPolicy parse_missing_policy(std::string_view text);
std::string_view to_string(Provenance provenance);

class GroupMembershipTable {
 public:
  using Entries = std::unordered_map<std::string, MembershipVector>;

  explicit GroupMembershipTable(Provenance provenance = Provenance::kHuman)
      : provenance_(provenance) {}

  Provenance provenance() const noexcept { return provenance_; }
  void set_provenance(Provenance p) noexcept { provenance_ = p; }

  // Registers a scheme. Re-registering an identical scheme is a no-op; a
  // different scheme under an existing name is a ConfigError.
  void add_scheme(SchemePtr scheme);
  bool has_scheme(std::string_view name) const;
  const SchemePtr& scheme(std::string_view name) const;
  // Sorted by scheme name.
  std::vector<SchemePtr> schemes() const;

  // Throws DuplicateDocument if the document already has a vector under the
  // vector's scheme, UnknownScheme if the scheme is not registered.
  void insert(std::string doc_id, MembershipVector vector);
  // Inserts or replaces.
  void assign(const std::string& doc_id, MembershipVector vector);

  const MembershipVector* find(std::string_view scheme,
                               const std::string& doc_id) const;
  const Entries& entries(std::string_view scheme) const;
  std::size_t size(std::string_view scheme) const;

  bool operator==(const GroupMembershipTable& other) const;

 private:
  struct SchemeEntries {
    SchemePtr scheme;
    Entries entries;
  };
  const SchemeEntries& lookup(std::string_view name) const;

  Provenance provenance_;
  std::map<std::string, SchemeEntries, std::less<>> by_scheme_;
};

MembershipVector membership_of(const GroupMembershipTable& table,
                               const std::string& doc_id,
                               std::string_view scheme, MissingPolicy fallback);

struct RankedDocument {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const RankedDocument&) const = default;
};

// Rank is implicit in position (1-based). Scores are carried along but never
// used for ordering.
class Ranking {
 public:
  Ranking(std::string query_id, std::string system_tag,
          std::vector<RankedDocument> entries);

  const std::string& query_id() const noexcept { return query_id_; }
  const std::string& system_tag() const noexcept { return system_tag_; }
  const std::vector<RankedDocument>& entries() const noexcept {
    return entries_;
  }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  bool operator==(const Ranking&) const = default;

 private:
  std::string query_id_;
  std::string system_tag_;
  std::vector<RankedDocument> entries_;
};

class RunSet {
 public:
  using QueryMap = std::map<std::string, Ranking, std::less<>>;
  using SystemMap = std::map<std::string, QueryMap, std::less<>>;

  // Throws InvalidArgument if (system, query) is already present.
  void add(Ranking ranking);
  const Ranking* find(std::string_view system, std::string_view query) const;
  const SystemMap& systems() const noexcept { return systems_; }
  std::vector<std::string> system_tags() const;
  // Union of query ids over all systems, sorted.
  std::vector<std::string> query_ids() const;
  bool empty() const noexcept { return systems_.empty(); }
  void merge(const RunSet& other);

  bool operator==(const RunSet&) const = default;

 private:
  SystemMap systems_;
};

class RankingSequence {
 public:
  RankingSequence(std::string query_id, std::vector<Ranking> rankings,
                  std::string policy = {});

  const std::string& query_id() const noexcept { return query_id_; }
  const std::string& policy() const noexcept { return policy_; }
  const std::vector<Ranking>& rankings() const noexcept { return rankings_; }
  std::size_t size() const noexcept { return rankings_.size(); }

 private:
  std::string query_id_;
  std::vector<Ranking> rankings_;
  std::string policy_;
};

class Qrels {
 public:
  using Judgments = std::map<std::string, int, std::less<>>;
  using QueryMap = std::map<std::string, Judgments, std::less<>>;

  void add(const std::string& query_id, const std::string& doc_id, int grade);
  const Judgments* find(std::string_view query_id) const;
  std::optional<int> grade(std::string_view query_id,
                           std::string_view doc_id) const;
  const QueryMap& queries() const noexcept { return queries_; }
  std::vector<std::string> query_ids() const;
  bool empty() const noexcept { return queries_.empty(); }

  bool operator==(const Qrels&) const = default;

 private:
  QueryMap queries_;
};

}  // namespace fairgm
