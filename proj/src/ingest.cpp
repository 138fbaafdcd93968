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
#include "fairgm/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <random>
#include <sstream>
#include <unordered_set>

#include "fairgm/util.hpp"
#include "json.hpp"

namespace fairgm {

namespace {

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars rejects a leading '+', which TREC tools sometimes emit.
    if (*first == '+') ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) return false;
  if constexpr (std::is_floating_point_v<T>) return std::isfinite(out);
  return true;
}

struct PendingEntry {
  long long rank;
  std::size_t order;
  std::string doc_id;
  double score;
};

}  // namespace

RunSet parse_run(std::istream& in) {
  // system -> query -> entries
  std::map<std::string, std::map<std::string, std::vector<PendingEntry>>>
      pending;
  std::map<std::pair<std::string, std::string>, std::unordered_set<std::string>>
      seen;
  std::string line;
  std::size_t line_no = 0;
  std::size_t order = 0;
  while (next_line(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_blanks(line);
    if (fields.size() != 6) {
      throw Error(ErrorCode::kMalformedLine,
                  "expected 6 fields, found " + std::to_string(fields.size()),
                  line_no);
    }
    if (fields[1] != "Q0") {
      throw Error(ErrorCode::kMalformedLine,
                  "second field must be Q0, found '" + std::string(fields[1]) +
                      "'",
                  line_no);
    }
    long long rank = 0;
    if (!parse_number(fields[3], rank)) {
      throw Error(ErrorCode::kNonNumericField,
                  "rank '" + std::string(fields[3]) + "' is not an integer",
                  line_no);
    }
    double score = 0.0;
    if (!parse_number(fields[4], score)) {
      throw Error(ErrorCode::kNonNumericField,
                  "score '" + std::string(fields[4]) + "' is not a number",
                  line_no);
    }
    std::string qid(fields[0]);
    std::string doc(fields[2]);
    std::string tag(fields[5]);
    if (!seen[{tag, qid}].insert(doc).second) {
      throw Error(ErrorCode::kDuplicateDocument,
                  "document '" + doc + "' repeated for query '" + qid +
                      "' in run '" + tag + "'",
                  line_no);
    }
    pending[tag][qid].push_back({rank, order++, std::move(doc), score});
  }

  RunSet runs;
  for (auto& [tag, queries] : pending) {
    for (auto& [qid, entries] : queries) {
      std::sort(entries.begin(), entries.end(),
                [](const PendingEntry& a, const PendingEntry& b) {
                  return a.rank != b.rank ? a.rank < b.rank : a.order < b.order;
                });
      std::vector<RankedDocument> docs;
      docs.reserve(entries.size());
      for (auto& e : entries) docs.push_back({std::move(e.doc_id), e.score});
      runs.add(Ranking(qid, tag, std::move(docs)));
    }
  }
  return runs;
}

void write_run(std::ostream& out, const RunSet& runs) {
  for (const auto& [tag, queries] : runs.systems()) {
    for (const auto& [qid, ranking] : queries) {
      std::size_t rank = 1;
      for (const auto& e : ranking.entries()) {
        out << qid << " Q0 " << e.doc_id << ' ' << rank++ << ' '
            << format_double(e.score) << ' ' << tag << '\n';
      }
    }
  }
}

std::string write_run(const RunSet& runs) {
  std::ostringstream out;
  write_run(out, runs);
  return out.str();
}

Qrels parse_qrels(std::istream& in) {
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_blanks(line);
    if (fields.size() != 4) {
      throw Error(ErrorCode::kMalformedLine,
                  "expected 4 fields, found " + std::to_string(fields.size()),
                  line_no);
    }
    int grade = 0;
    if (!parse_number(fields[3], grade)) {
      throw Error(ErrorCode::kMalformedLine,
                  "grade '" + std::string(fields[3]) + "' is not an integer",
                  line_no);
    }
    try {
      qrels.add(std::string(fields[0]), std::string(fields[2]), grade);
    } catch (const Error& e) {
      throw Error(e.code(),
                  "(" + std::string(fields[0]) + ", " + std::string(fields[2]) +
                      ")",
                  line_no);
    }
  }
  return qrels;
}

void write_qrels(std::ostream& out, const Qrels& qrels) {
  for (const auto& [qid, judgments] : qrels.queries()) {
    for (const auto& [doc, grade] : judgments) {
      out << qid << " 0 " << doc << ' ' << grade << '\n';
    }
  }
}

std::string write_qrels(const Qrels& qrels) {
  std::ostringstream out;
  write_qrels(out, qrels);
  return out.str();
}

AnnotationFormat parse_annotation_format(std::string_view text) {
  if (text == "tsv") return AnnotationFormat::kTsv;
  if (text == "jsonl") return AnnotationFormat::kJsonl;
  throw Error(ErrorCode::kConfigError,
              "unknown annotation format '" + std::string(text) + "'");
}

namespace {

AnnotationRecord parse_tsv_record(std::string_view line, std::size_t line_no) {
  const auto fields = split(line, '\t');
  if (fields.size() != 3) {
    throw Error(ErrorCode::kMalformedLine,
                "expected 3 tab-separated fields, found " +
                    std::to_string(fields.size()),
                line_no);
  }
  AnnotationRecord record{std::string(fields[0]), std::string(fields[1]), {}};
  if (record.doc_id.empty() || record.scheme.empty()) {
    throw Error(ErrorCode::kMalformedLine, "empty document id or scheme",
                line_no);
  }
  for (auto pair : split(fields[2], ',')) {
    const auto colon = pair.rfind(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::kMalformedLine,
                  "expected label:weight, found '" + std::string(pair) + "'",
                  line_no);
    }
    double weight = 0.0;
    if (!parse_number(pair.substr(colon + 1), weight)) {
      throw Error(ErrorCode::kMalformedLine,
                  "weight in '" + std::string(pair) + "' is not a number",
                  line_no);
    }
    record.weights.emplace_back(std::string(pair.substr(0, colon)), weight);
  }
  return record;
}

AnnotationRecord parse_jsonl_record(std::string_view line,
                                    std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformedLine, e.what(), line_no);
  }
  if (!j.is_object() || !j.contains("doc") || !j["doc"].is_string() ||
      !j.contains("scheme") || !j["scheme"].is_string() ||
      !j.contains("weights") || !j["weights"].is_object()) {
    throw Error(ErrorCode::kMalformedLine,
                "expected an object with string 'doc', string 'scheme' and "
                "object 'weights'",
                line_no);
  }
  AnnotationRecord record{j["doc"].get<std::string>(),
                          j["scheme"].get<std::string>(),
                          {}};
  for (const auto& [label, weight] : j["weights"].items()) {
    if (!weight.is_number()) {
      throw Error(ErrorCode::kMalformedLine,
                  "weight for label '" + label + "' is not a number", line_no);
    }
    record.weights.emplace_back(label, weight.get<double>());
  }
  return record;
}

MembershipVector to_vector(const AnnotationRecord& record,
                           const SchemePtr& scheme, std::size_t line_no) {
  std::vector<double> raw(scheme->size(), 0.0);
  std::vector<bool> listed(scheme->size(), false);
  for (const auto& [label, weight] : record.weights) {
    const auto idx = scheme->index_of(label);
    if (!idx) {
      throw Error(ErrorCode::kUnknownLabel,
                  "label '" + label + "' is not in scheme '" + scheme->name() +
                      "'",
                  line_no);
    }
    if (listed[*idx]) {
      throw Error(ErrorCode::kMalformedLine,
                  "label '" + label + "' listed twice", line_no);
    }
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
      throw Error(ErrorCode::kMalformedLine,
                  "weight for label '" + label + "' must be non-negative",
                  line_no);
    }
    listed[*idx] = true;
    raw[*idx] = weight;
  }
  try {
    return normalize(raw, scheme);
  } catch (const Error& e) {
    throw Error(e.code(), "document '" + record.doc_id + "'", line_no);
  }
}

}  // namespace

GroupMembershipTable parse_annotations(std::istream& in,
                                       AnnotationFormat format,
                                       std::span<const SchemePtr> schemes,
                                       Provenance provenance) {
  GroupMembershipTable table(provenance);
  for (const auto& s : schemes) table.add_scheme(s);
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    AnnotationRecord record = format == AnnotationFormat::kTsv
                                  ? parse_tsv_record(line, line_no)
                                  : parse_jsonl_record(line, line_no);
    if (!table.has_scheme(record.scheme)) {
      throw Error(ErrorCode::kUnknownScheme,
                  "scheme '" + record.scheme + "' is not declared", line_no);
    }
    const SchemePtr& scheme = table.scheme(record.scheme);
    MembershipVector v = to_vector(record, scheme, line_no);
    try {
      table.insert(std::move(record.doc_id), std::move(v));
    } catch (const Error& e) {
      throw Error(e.code(), e.message(), line_no);
    }
  }
  return table;
}

void write_annotations(std::ostream& out, const GroupMembershipTable& table,
                       AnnotationFormat format) {
  for (const auto& scheme : table.schemes()) {
    const auto& entries = table.entries(scheme->name());
    std::vector<const std::string*> ids;
    ids.reserve(entries.size());
    for (const auto& [doc, v] : entries) ids.push_back(&doc);
    std::sort(ids.begin(), ids.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });
    for (const std::string* doc : ids) {
      const MembershipVector& v = entries.at(*doc);
      if (format == AnnotationFormat::kTsv) {
        out << *doc << '\t' << scheme->name() << '\t';
        bool first = true;
        for (std::size_t g = 0; g < v.size(); ++g) {
          if (v[g] == 0.0) continue;
          if (!first) out << ',';
          out << scheme->labels()[g] << ':' << format_double(v[g]);
          first = false;
        }
        out << '\n';
      } else {
        nlohmann::ordered_json j;
        j["doc"] = *doc;
        j["scheme"] = scheme->name();
        j["weights"] = nlohmann::ordered_json::object();
        for (std::size_t g = 0; g < v.size(); ++g) {
          if (v[g] != 0.0) j["weights"][scheme->labels()[g]] = v[g];
        }
        out << j.dump() << '\n';
      }
    }
  }
}

std::string write_annotations(const GroupMembershipTable& table,
                              AnnotationFormat format) {
  std::ostringstream out;
  write_annotations(out, table, format);
  return out.str();
}

SampleSplit stratified_sample(const GroupMembershipTable& table,
                              const SamplePlan& plan) {
  const SchemePtr& scheme = table.scheme(plan.scheme);
  std::vector<std::vector<std::string>> by_group(scheme->size());
  for (const auto& [doc, v] : table.entries(plan.scheme)) {
    by_group[v.argmax()].push_back(doc);
  }
  const std::size_t need = plan.train_per_group + plan.test_per_group;
  SampleSplit split;
  for (std::size_t g = 0; g < by_group.size(); ++g) {
    auto& docs = by_group[g];
    if (docs.size() < need) {
      throw Error(ErrorCode::kInsufficientDocuments,
                  "group '" + scheme->labels()[g] + "' has " +
                      std::to_string(docs.size()) + " documents, need " +
                      std::to_string(need));
    }
    // Sorting first makes the draw independent of hash-map iteration order.
    std::sort(docs.begin(), docs.end());
    std::mt19937_64 rng(combine_seed(plan.seed, g));
    std::shuffle(docs.begin(), docs.end(), rng);
    split.train.insert(split.train.end(), docs.begin(),
                       docs.begin() + plan.train_per_group);
    split.test.insert(split.test.end(), docs.begin() + plan.train_per_group,
                      docs.begin() + need);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {
template <typename Fn>
auto with_file(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  }
  try {
    return fn(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message(), e.line());
  }
}
}  // namespace

RunSet load_run_file(const std::filesystem::path& path) {
  return with_file(path, [](std::istream& in) { return parse_run(in); });
}

Qrels load_qrels_file(const std::filesystem::path& path) {
  return with_file(path, [](std::istream& in) { return parse_qrels(in); });
}

GroupMembershipTable load_annotation_file(const std::filesystem::path& path,
                                          AnnotationFormat format,
                                          std::span<const SchemePtr> schemes,
                                          Provenance provenance) {
  return with_file(path, [&](std::istream& in) {
    return parse_annotations(in, format, schemes, provenance);
  });
}

}  // namespace fairgm
