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
#include "fairgm/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_set>

namespace fairgm {

namespace {
bool valid_label(const std::string& label) {
  return !label.empty() &&
         label.find_first_of("\t\n\r,:") == std::string::npos;
}
}  // namespace

GroupScheme::GroupScheme(std::string name, std::vector<std::string> labels,
                         std::optional<std::size_t> unknown_index)
    : name_(std::move(name)),
      labels_(std::move(labels)),
      unknown_index_(unknown_index) {
  if (name_.empty() || name_.find_first_of("\t\n\r") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "invalid scheme name");
  }
  if (labels_.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "scheme '" + name_ + "' needs at least 2 groups");
  }
  std::set<std::string_view> seen;
  for (const auto& label : labels_) {
    if (!valid_label(label)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "invalid label '" + label + "' in scheme '" + name_ + "'");
    }
    if (!seen.insert(label).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate label '" + label + "' in scheme '" + name_ + "'");
    }
  }
  if (unknown_index_ && *unknown_index_ >= labels_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown index out of range in scheme '" + name_ + "'");
  }
}

std::optional<std::size_t> GroupScheme::index_of(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

SchemePtr make_scheme(std::string name, std::vector<std::string> labels,
                      std::optional<std::size_t> unknown_index) {
  return std::make_shared<const GroupScheme>(std::move(name), std::move(labels),
                                             unknown_index);
}

SchemePtr product_scheme(const GroupScheme& a, const GroupScheme& b) {
  std::vector<std::string> labels;
  labels.reserve(a.size() * b.size());
  for (const auto& la : a.labels()) {
    for (const auto& lb : b.labels()) labels.push_back(la + "&" + lb);
  }
  std::optional<std::size_t> unknown;
  if (a.unknown_index() && b.unknown_index()) {
    unknown = *a.unknown_index() * b.size() + *b.unknown_index();
  }
  return make_scheme(a.name() + "&" + b.name(), std::move(labels), unknown);
}

MembershipVector MembershipVector::one_hot(SchemePtr scheme,
                                           std::size_t group) {
  if (!scheme || group >= scheme->size()) {
    throw Error(ErrorCode::kInvalidArgument, "group index out of range");
  }
  std::vector<double> w(scheme->size(), 0.0);
  w[group] = 1.0;
  return MembershipVector(std::move(scheme), std::move(w));
}

MembershipVector MembershipVector::uniform(SchemePtr scheme) {
  if (!scheme) throw Error(ErrorCode::kInvalidArgument, "null scheme");
  const auto k = scheme->size();
  return MembershipVector(std::move(scheme),
                          std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

std::size_t MembershipVector::argmax() const noexcept {
  return static_cast<std::size_t>(
      std::max_element(weights_.begin(), weights_.end()) - weights_.begin());
}

bool MembershipVector::operator==(const MembershipVector& other) const {
  if (weights_ != other.weights_) return false;
  if (scheme_ == other.scheme_) return true;
  return scheme_ && other.scheme_ && *scheme_ == *other.scheme_;
}

MembershipVector normalize(std::span<const double> raw, SchemePtr scheme) {
  if (!scheme) throw Error(ErrorCode::kInvalidArgument, "null scheme");
  if (raw.size() != scheme->size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "expected " + std::to_string(scheme->size()) +
                    " weights for scheme '" + scheme->name() + "', got " +
                    std::to_string(raw.size()));
  }
  double sum = 0.0;
  for (double w : raw) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "membership weights must be finite and non-negative");
    }
    sum += w;
  }
  if (sum <= 0.0) {
    throw Error(ErrorCode::kZeroMass,
                "membership weights for scheme '" + scheme->name() +
                    "' sum to zero");
  }
  std::vector<double> out(raw.begin(), raw.end());
  const double slack =
      4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(raw.size());
  if (std::abs(sum - 1.0) > slack) {
    for (double& w : out) w /= sum;
  }
  return MembershipVector(std::move(scheme), std::move(out));
}

MembershipVector intersect_schemes(const MembershipVector& a,
                                   const MembershipVector& b) {
  return intersect_schemes(a, b, product_scheme(*a.scheme(), *b.scheme()));
}

MembershipVector intersect_schemes(const MembershipVector& a,
                                   const MembershipVector& b,
                                   SchemePtr product) {
  if (!product || product->size() != a.size() * b.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "product scheme size does not match the operands");
  }
  std::vector<double> w;
  w.reserve(product->size());
  for (double wa : a.weights()) {
    for (double wb : b.weights()) w.push_back(wa * wb);
  }
  return MembershipVector(std::move(product), std::move(w));
}

std::string_view to_string(MissingPolicy policy) {
  switch (policy) {
    case MissingPolicy::kAllUnknown: return "unknown";
    case MissingPolicy::kUniform: return "uniform";
    case MissingPolicy::kReject: return "reject";
  }
  return "?";
}

MissingPolicy parse_missing_policy(std::string_view text) {
  if (text == "unknown") return MissingPolicy::kAllUnknown;
  if (text == "uniform") return MissingPolicy::kUniform;
  if (text == "reject") return MissingPolicy::kReject;
  throw Error(ErrorCode::kConfigError,
              "unknown missing-document policy '" + std::string(text) + "'");
}

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::kHuman: return "human";
    case Provenance::kModel: return "model";
    case Provenance::kSynthetic: return "synthetic";
  }
  return "?";
}

void GroupMembershipTable::add_scheme(SchemePtr scheme) {
  if (!scheme) throw Error(ErrorCode::kInvalidArgument, "null scheme");
  auto it = by_scheme_.find(scheme->name());
  if (it != by_scheme_.end()) {
    if (!(*it->second.scheme == *scheme)) {
      throw Error(ErrorCode::kConfigError,
                  "conflicting declarations for scheme '" + scheme->name() +
                      "'");
    }
    return;
  }
  const std::string name = scheme->name();
  by_scheme_.emplace(name, SchemeEntries{std::move(scheme), {}});
}

bool GroupMembershipTable::has_scheme(std::string_view name) const {
  return by_scheme_.find(name) != by_scheme_.end();
}

const GroupMembershipTable::SchemeEntries& GroupMembershipTable::lookup(
    std::string_view name) const {
  auto it = by_scheme_.find(name);
  if (it == by_scheme_.end()) {
    throw Error(ErrorCode::kUnknownScheme,
                "scheme '" + std::string(name) + "' is not registered");
  }
  return it->second;
}

const SchemePtr& GroupMembershipTable::scheme(std::string_view name) const {
  return lookup(name).scheme;
}

std::vector<SchemePtr> GroupMembershipTable::schemes() const {
  std::vector<SchemePtr> out;
  out.reserve(by_scheme_.size());
  for (const auto& [name, entry] : by_scheme_) out.push_back(entry.scheme);
  return out;
}

void GroupMembershipTable::insert(std::string doc_id, MembershipVector vector) {
  auto it = by_scheme_.find(vector.scheme()->name());
  if (it == by_scheme_.end()) {
    throw Error(ErrorCode::kUnknownScheme,
                "scheme '" + vector.scheme()->name() + "' is not registered");
  }
  if (!(*it->second.scheme == *vector.scheme())) {
    throw Error(ErrorCode::kConfigError,
                "vector scheme differs from registered scheme '" +
                    vector.scheme()->name() + "'");
  }
  auto [pos, inserted] =
      it->second.entries.try_emplace(std::move(doc_id), std::move(vector));
  if (!inserted) {
    throw Error(ErrorCode::kDuplicateDocument,
                "document '" + pos->first + "' already annotated for scheme '" +
                    it->first + "'");
  }
}

void GroupMembershipTable::assign(const std::string& doc_id,
                                  MembershipVector vector) {
  auto it = by_scheme_.find(vector.scheme()->name());
  if (it == by_scheme_.end()) {
    throw Error(ErrorCode::kUnknownScheme,
                "scheme '" + vector.scheme()->name() + "' is not registered");
  }
  it->second.entries.insert_or_assign(doc_id, std::move(vector));
}

const MembershipVector* GroupMembershipTable::find(
    std::string_view scheme, const std::string& doc_id) const {
  const auto& entries = lookup(scheme).entries;
  auto it = entries.find(doc_id);
  return it == entries.end() ? nullptr : &it->second;
}

const GroupMembershipTable::Entries& GroupMembershipTable::entries(
    std::string_view scheme) const {
  return lookup(scheme).entries;
}

std::size_t GroupMembershipTable::size(std::string_view scheme) const {
  return lookup(scheme).entries.size();
}

bool GroupMembershipTable::operator==(const GroupMembershipTable& other) const {
  if (provenance_ != other.provenance_) return false;
  if (by_scheme_.size() != other.by_scheme_.size()) return false;
  for (const auto& [name, entry] : by_scheme_) {
    auto it = other.by_scheme_.find(name);
    if (it == other.by_scheme_.end()) return false;
    if (!(*entry.scheme == *it->second.scheme)) return false;
    if (entry.entries != it->second.entries) return false;
  }
  return true;
}

MembershipVector membership_of(const GroupMembershipTable& table,
                               const std::string& doc_id,
                               std::string_view scheme,
                               MissingPolicy fallback) {
  const SchemePtr& s = table.scheme(scheme);
  if (fallback == MissingPolicy::kAllUnknown && !s->unknown_index()) {
    throw Error(ErrorCode::kNoUnknownGroup,
                "scheme '" + s->name() + "' has no unknown group");
  }
  if (const auto* found = table.find(scheme, doc_id)) return *found;
  switch (fallback) {
    case MissingPolicy::kUniform:
      return MembershipVector::uniform(s);
    case MissingPolicy::kAllUnknown:
      return MembershipVector::one_hot(s, *s->unknown_index());
    case MissingPolicy::kReject:
      break;
  }
  throw Error(ErrorCode::kMissingDocument,
              "document '" + doc_id + "' has no annotation for scheme '" +
                  s->name() + "'");
}

Ranking::Ranking(std::string query_id, std::string system_tag,
                 std::vector<RankedDocument> entries)
    : query_id_(std::move(query_id)),
      system_tag_(std::move(system_tag)),
      entries_(std::move(entries)) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(entries_.size());
  for (const auto& e : entries_) {
    if (!seen.insert(e.doc_id).second) {
      throw Error(ErrorCode::kDuplicateDocument,
                  "document '" + e.doc_id + "' appears twice in query '" +
                      query_id_ + "' of system '" + system_tag_ + "'");
    }
  }
}

void RunSet::add(Ranking ranking) {
  auto& queries = systems_[ranking.system_tag()];
  if (queries.contains(ranking.query_id())) {
    throw Error(ErrorCode::kInvalidArgument,
                "system '" + ranking.system_tag() +
                    "' already has a ranking for query '" +
                    ranking.query_id() + "'");
  }
  std::string qid = ranking.query_id();
  queries.emplace(std::move(qid), std::move(ranking));
}

const Ranking* RunSet::find(std::string_view system,
                            std::string_view query) const {
  auto s = systems_.find(system);
  if (s == systems_.end()) return nullptr;
  auto q = s->second.find(query);
  return q == s->second.end() ? nullptr : &q->second;
}

std::vector<std::string> RunSet::system_tags() const {
  std::vector<std::string> out;
  for (const auto& [tag, queries] : systems_) out.push_back(tag);
  return out;
}

std::vector<std::string> RunSet::query_ids() const {
  std::set<std::string> ids;
  for (const auto& [tag, queries] : systems_) {
    for (const auto& [qid, ranking] : queries) ids.insert(qid);
  }
  return {ids.begin(), ids.end()};
}

void RunSet::merge(const RunSet& other) {
  for (const auto& [tag, queries] : other.systems_) {
    for (const auto& [qid, ranking] : queries) add(ranking);
  }
}

RankingSequence::RankingSequence(std::string query_id,
                                 std::vector<Ranking> rankings,
                                 std::string policy)
    : query_id_(std::move(query_id)),
      rankings_(std::move(rankings)),
      policy_(std::move(policy)) {
  if (rankings_.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "ranking sequence for query '" + query_id_ + "' is empty");
  }
  for (const auto& r : rankings_) {
    if (r.query_id() != query_id_) {
      throw Error(ErrorCode::kInvalidArgument,
                  "ranking for query '" + r.query_id() +
                      "' in sequence for query '" + query_id_ + "'");
    }
  }
}

void Qrels::add(const std::string& query_id, const std::string& doc_id,
                int grade) {
  if (grade < 0) {
    throw Error(ErrorCode::kNegativeGrade,
                "grade " + std::to_string(grade) + " for (" + query_id + ", " +
                    doc_id + ")");
  }
  auto& judgments = queries_[query_id];
  if (!judgments.emplace(doc_id, grade).second) {
    throw Error(ErrorCode::kDuplicateJudgment,
                "(" + query_id + ", " + doc_id + ") judged twice");
  }
}

const Qrels::Judgments* Qrels::find(std::string_view query_id) const {
  auto it = queries_.find(query_id);
  return it == queries_.end() ? nullptr : &it->second;
}

std::optional<int> Qrels::grade(std::string_view query_id,
                                std::string_view doc_id) const {
  const auto* j = find(query_id);
  if (!j) return std::nullopt;
  auto it = j->find(doc_id);
  if (it == j->end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Qrels::query_ids() const {
  std::vector<std::string> out;
  for (const auto& [qid, j] : queries_) out.push_back(qid);
  return out;
}

}  // namespace fairgm
