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
#include "fairgm/exposure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "fairgm/util.hpp"

namespace fairgm {

AttentionModel AttentionModel::geometric(double patience,
                                         std::optional<std::size_t> cutoff) {
  if (!(patience > 0.0 && patience < 1.0)) {
    throw Error(ErrorCode::kInvalidPatience,
                "patience must lie in (0, 1), got " + format_double(patience));
  }
  if (cutoff && *cutoff == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cutoff must be at least 1");
  }
  return AttentionModel(Kind::kGeometric, patience, cutoff);
}

AttentionModel AttentionModel::log_discount(std::optional<std::size_t> cutoff) {
  if (cutoff && *cutoff == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cutoff must be at least 1");
  }
  return AttentionModel(Kind::kLogDiscount, 0.0, cutoff);
}

AttentionModel AttentionModel::uniform(std::size_t top_k) {
  if (top_k == 0) {
    throw Error(ErrorCode::kInvalidArgument, "top-k must be at least 1");
  }
  return AttentionModel(Kind::kUniform, 0.0, top_k);
}

std::size_t AttentionModel::retained(std::size_t n) const noexcept {
  return cutoff_ ? std::min(n, *cutoff_) : n;
}

double AttentionModel::weight(std::size_t rank) const {
  if (rank == 0) throw Error(ErrorCode::kInvalidArgument, "ranks are 1-based");
  if (cutoff_ && rank > *cutoff_) return 0.0;
  switch (kind_) {
    case Kind::kGeometric:
      return patience_ *
             std::pow(1.0 - patience_, static_cast<double>(rank - 1));
    case Kind::kLogDiscount:
      return 1.0 / std::log2(static_cast<double>(rank) + 1.0);
    case Kind::kUniform:
      return 1.0;
  }
  return 0.0;
}

std::string AttentionModel::describe() const {
  std::string out;
  switch (kind_) {
    case Kind::kGeometric: out = "geometric(p=" + format_double(patience_) + ")"; break;
    case Kind::kLogDiscount: out = "log-discount"; break;
    case Kind::kUniform: out = "uniform"; break;
  }
  if (cutoff_) out += "@" + std::to_string(*cutoff_);
  return out;
}

std::vector<double> attention_weights(const AttentionModel& model,
                                      std::size_t n) {
  if (n == 0) {
    throw Error(ErrorCode::kInvalidArgument, "ranking length must be >= 1");
  }
  std::vector<double> w(model.retained(n));
  for (std::size_t r = 0; r < w.size(); ++r) w[r] = model.weight(r + 1);
  return w;
}

double ExposureVector::total() const {
  return std::accumulate(mass.begin(), mass.end(), 0.0);
}

ExposureVector ExposureVector::to_normalized() const {
  const double sum = total();
  if (!(sum > 0.0)) {
    throw Error(ErrorCode::kZeroMass, "exposure vector has no mass");
  }
  ExposureVector out{scheme, mass, true};
  for (double& m : out.mass) m /= sum;
  return out;
}

MembershipLookup::MembershipLookup(const GroupMembershipTable& table,
                                   std::string_view scheme,
                                   MissingPolicy fallback)
    : MembershipLookup(table, std::vector<std::string>{std::string(scheme)},
                       fallback) {}

MembershipLookup::MembershipLookup(const GroupMembershipTable& table,
                                   std::vector<std::string> schemes,
                                   MissingPolicy fallback)
    : table_(&table), fallback_(fallback) {
  if (schemes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no scheme given");
  }
  for (const auto& name : schemes) {
    const SchemePtr& s = table.scheme(name);
    if (fallback == MissingPolicy::kAllUnknown && !s->unknown_index()) {
      throw Error(ErrorCode::kNoUnknownGroup,
                  "scheme '" + s->name() + "' has no unknown group");
    }
    components_.push_back(s);
  }
  scheme_ = components_.front();
  for (std::size_t i = 1; i < components_.size(); ++i) {
    scheme_ = product_scheme(*scheme_, *components_[i]);
  }
}

namespace {

// Membership weights of one component scheme, either stored or produced by
// the fallback policy into `scratch`.
std::span<const double> component_weights(const GroupMembershipTable& table,
                                          const SchemePtr& scheme,
                                          const std::string& doc_id,
                                          MissingPolicy fallback,
                                          std::vector<double>& scratch) {
  if (const auto* v = table.find(scheme->name(), doc_id)) return v->weights();
  const std::size_t k = scheme->size();
  switch (fallback) {
    case MissingPolicy::kUniform:
      scratch.assign(k, 1.0 / static_cast<double>(k));
      return scratch;
    case MissingPolicy::kAllUnknown:
      scratch.assign(k, 0.0);
      scratch[*scheme->unknown_index()] = 1.0;
      return scratch;
    case MissingPolicy::kReject:
      break;
  }
  throw Error(ErrorCode::kMissingDocument,
              "document '" + doc_id + "' has no annotation for scheme '" +
                  scheme->name() + "'");
}

}  // namespace

void MembershipLookup::accumulate(const std::string& doc_id, double scale,
                                  std::span<double> accum) const {
  if (components_.size() == 1) {
    std::vector<double> scratch;
    auto w = component_weights(*table_, components_[0], doc_id, fallback_,
                               scratch);
    for (std::size_t g = 0; g < w.size(); ++g) accum[g] += scale * w[g];
    return;
  }
  // Expand the product one component at a time.
  std::vector<double> joint{scale};
  std::vector<double> next;
  std::vector<double> scratch;
  for (const auto& s : components_) {
    auto w = component_weights(*table_, s, doc_id, fallback_, scratch);
    next.clear();
    next.reserve(joint.size() * w.size());
    for (double a : joint) {
      for (double b : w) next.push_back(a * b);
    }
    joint.swap(next);
  }
  for (std::size_t g = 0; g < joint.size(); ++g) accum[g] += joint[g];
}

MembershipVector MembershipLookup::membership(const std::string& doc_id) const {
  std::vector<double> w(scheme_->size(), 0.0);
  accumulate(doc_id, 1.0, w);
  return normalize(w, scheme_);
}

CumulativeExposure cumulative_exposure(const Ranking& ranking,
                                       const MembershipLookup& lookup,
                                       const AttentionModel& model) {
  if (ranking.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "ranking for query '" + ranking.query_id() + "' is empty");
  }
  const auto weights = attention_weights(model, ranking.size());
  ExposureVector raw{lookup.scheme(),
                     std::vector<double>(lookup.scheme()->size(), 0.0), false};
  for (std::size_t r = 0; r < weights.size(); ++r) {
    lookup.accumulate(ranking.entries()[r].doc_id, weights[r], raw.mass);
  }
  ExposureVector normalized = raw.to_normalized();
  return {std::move(raw), std::move(normalized)};
}

CumulativeExposure cumulative_exposure(const Ranking& ranking,
                                       const GroupMembershipTable& table,
                                       std::string_view scheme,
                                       const AttentionModel& model,
                                       MissingPolicy fallback) {
  return cumulative_exposure(ranking, MembershipLookup(table, scheme, fallback),
                             model);
}

RelevanceMode parse_relevance_mode(std::string_view text) {
  if (text == "binary") return RelevanceMode::kBinary;
  if (text == "graded") return RelevanceMode::kGraded;
  throw Error(ErrorCode::kConfigError,
              "unknown relevance mode '" + std::string(text) + "'");
}

namespace {

// Adds the (grade-weighted) membership of relevant judged documents; returns
// the total weight added.
double add_relevant(const Qrels::Judgments& judgments,
                    const MembershipLookup& lookup, RelevanceMode mode,
                    std::span<double> accum) {
  double total = 0.0;
  for (const auto& [doc, grade] : judgments) {
    if (grade <= 0) continue;
    const double w = mode == RelevanceMode::kGraded ? grade : 1.0;
    lookup.accumulate(doc, w, accum);
    total += w;
  }
  return total;
}

}  // namespace

ExposureVector target_from_qrels(const Qrels& qrels, std::string_view query_id,
                                 const MembershipLookup& lookup,
                                 RelevanceMode mode) {
  ExposureVector out{lookup.scheme(),
                     std::vector<double>(lookup.scheme()->size(), 0.0), true};
  const auto* judgments = qrels.find(query_id);
  const double total =
      judgments ? add_relevant(*judgments, lookup, mode, out.mass) : 0.0;
  if (total <= 0.0) {
    throw Error(ErrorCode::kNoRelevantDocuments,
                "query '" + std::string(query_id) + "' has no relevant documents");
  }
  for (double& m : out.mass) m /= total;
  return out;
}

ExposureVector target_from_qrels(const Qrels& qrels, std::string_view query_id,
                                 const GroupMembershipTable& table,
                                 std::string_view scheme, RelevanceMode mode,
                                 MissingPolicy fallback) {
  return target_from_qrels(qrels, query_id,
                           MembershipLookup(table, scheme, fallback), mode);
}

ExposureVector target_from_qrels_corpus(const Qrels& qrels,
                                        const MembershipLookup& lookup,
                                        RelevanceMode mode) {
  ExposureVector out{lookup.scheme(),
                     std::vector<double>(lookup.scheme()->size(), 0.0), true};
  double total = 0.0;
  for (const auto& [qid, judgments] : qrels.queries()) {
    total += add_relevant(judgments, lookup, mode, out.mass);
  }
  if (total <= 0.0) {
    throw Error(ErrorCode::kNoRelevantDocuments,
                "qrels contain no relevant documents");
  }
  for (double& m : out.mass) m /= total;
  return out;
}

ExposureVector target_uniform(const SchemePtr& scheme, bool exclude_unknown) {
  const std::size_t k = scheme->size();
  std::vector<double> mass(k, 0.0);
  const auto skip = exclude_unknown ? scheme->unknown_index() : std::nullopt;
  const double share = 1.0 / static_cast<double>(skip ? k - 1 : k);
  for (std::size_t g = 0; g < k; ++g) {
    if (!skip || g != *skip) mass[g] = share;
  }
  return {scheme, std::move(mass), true};
}

ExposureVector expected_group_exposure(std::span<const Ranking* const> rankings,
                                       const MembershipLookup& lookup,
                                       const AttentionModel& model) {
  if (rankings.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "ranking sequence is empty");
  }
  ExposureVector out{lookup.scheme(),
                     std::vector<double>(lookup.scheme()->size(), 0.0), false};
  for (const Ranking* ranking : rankings) {
    const auto exposure = cumulative_exposure(*ranking, lookup, model);
    for (std::size_t g = 0; g < out.mass.size(); ++g) {
      out.mass[g] += exposure.raw.mass[g];
    }
  }
  const double n = static_cast<double>(rankings.size());
  for (double& m : out.mass) m /= n;
  return out;
}

ExposureVector expected_group_exposure(const RankingSequence& sequence,
                                       const MembershipLookup& lookup,
                                       const AttentionModel& model) {
  std::vector<const Ranking*> rankings;
  for (const auto& r : sequence.rankings()) rankings.push_back(&r);
  return expected_group_exposure(rankings, lookup, model);
}

ExposureVector expected_group_exposure(const RankingSequence& sequence,
                                       const GroupMembershipTable& table,
                                       std::string_view scheme,
                                       const AttentionModel& model,
                                       MissingPolicy fallback) {
  return expected_group_exposure(
      sequence, MembershipLookup(table, scheme, fallback), model);
}

std::vector<double> target_document_exposure(std::span<const int> grades,
                                             const AttentionModel& model) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < grades.size(); ++i) {
    if (grades[i] > 0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return grades[a] > grades[b];
  });
  std::vector<double> out(grades.size(), 0.0);
  std::size_t band_start = 0;
  while (band_start < order.size()) {
    std::size_t band_end = band_start;
    while (band_end < order.size() &&
           grades[order[band_end]] == grades[order[band_start]]) {
      ++band_end;
    }
    double sum = 0.0;
    for (std::size_t r = band_start; r < band_end; ++r) sum += model.weight(r + 1);
    const double share = sum / static_cast<double>(band_end - band_start);
    for (std::size_t r = band_start; r < band_end; ++r) out[order[r]] = share;
    band_start = band_end;
  }
  return out;
}

ExposureVector target_group_exposure(const Qrels& qrels,
                                     std::string_view query_id,
                                     const MembershipLookup& lookup,
                                     const AttentionModel& model) {
  const auto* judgments = qrels.find(query_id);
  if (!judgments || judgments->empty()) {
    throw Error(ErrorCode::kNoJudgedDocuments,
                "query '" + std::string(query_id) + "' has no judgments");
  }
  std::vector<int> grades;
  grades.reserve(judgments->size());
  for (const auto& [doc, grade] : *judgments) grades.push_back(grade);
  const auto per_doc = target_document_exposure(grades, model);
  ExposureVector out{lookup.scheme(),
                     std::vector<double>(lookup.scheme()->size(), 0.0), false};
  std::size_t i = 0;
  for (const auto& [doc, grade] : *judgments) {
    if (per_doc[i] > 0.0) lookup.accumulate(doc, per_doc[i], out.mass);
    ++i;
  }
  return out;
}

ExposureVector target_group_exposure(const Qrels& qrels,
                                     std::string_view query_id,
                                     const GroupMembershipTable& table,
                                     std::string_view scheme,
                                     const AttentionModel& model,
                                     MissingPolicy fallback) {
  return target_group_exposure(qrels, query_id,
                               MembershipLookup(table, scheme, fallback), model);
}

}  // namespace fairgm
