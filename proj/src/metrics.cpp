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
#include "fairgm/metrics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fairgm/util.hpp"
#include "json.hpp"

namespace fairgm {

Divergence parse_divergence(std::string_view text) {
  if (text == "kl") return Divergence::kKl;
  if (text == "js") return Divergence::kJs;
  throw Error(ErrorCode::kConfigError,
              "unknown divergence '" + std::string(text) + "'");
}

std::string_view to_string(Divergence d) {
  return d == Divergence::kKl ? "kl" : "js";
}

namespace {

void check_distributions(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "distributions of length " + std::to_string(p.size()) +
                    " and " + std::to_string(q.size()));
  }
  for (auto v : {p, q}) {
    double sum = 0.0;
    for (double x : v) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw Error(ErrorCode::kNotADistribution, "negative or non-finite entry");
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorCode::kNotADistribution,
                  "entries sum to " + format_double(sum));
    }
  }
}

double kl_unchecked(std::span<const double> p, std::span<const double> q) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) sum += p[i] * std::log(p[i] / q[i]);
  }
  return sum;
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q,
                     double epsilon) {
  check_distributions(p, q);
  if (!(epsilon >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing must be non-negative");
  }
  double zp = 0.0;
  double zq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    zp += p[i] + epsilon;
    zq += q[i] + epsilon;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    sum += p[i] * std::log(((p[i] + epsilon) / zp) / ((q[i] + epsilon) / zq));
  }
  return sum;
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
  check_distributions(p, q);
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  return 0.5 * kl_unchecked(p, m) + 0.5 * kl_unchecked(q, m);
}

double divergence(Divergence kind, std::span<const double> p,
                  std::span<const double> q) {
  return kind == Divergence::kKl ? kl_divergence(p, q) : js_divergence(p, q);
}

double awrf(const Ranking& ranking, const MembershipLookup& lookup,
            const AttentionModel& model, const ExposureVector& target,
            Divergence kind) {
  const auto exposure = cumulative_exposure(ranking, lookup, model);
  return divergence(kind, exposure.normalized.mass, target.mass);
}

double awrf(const Ranking& ranking, const GroupMembershipTable& table,
            std::string_view scheme, const AttentionModel& model,
            const ExposureVector& target, Divergence kind,
            MissingPolicy fallback) {
  return awrf(ranking, MembershipLookup(table, scheme, fallback), model, target,
              kind);
}

ExpectedExposureMetrics ee_metrics(const ExposureVector& gamma,
                                   const ExposureVector& gamma_star) {
  if (gamma.mass.size() != gamma_star.mass.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "exposure vectors of length " +
                    std::to_string(gamma.mass.size()) + " and " +
                    std::to_string(gamma_star.mass.size()));
  }
  ExpectedExposureMetrics out;
  for (std::size_t g = 0; g < gamma.mass.size(); ++g) {
    const double diff = gamma.mass[g] - gamma_star.mass[g];
    out.loss += diff * diff;
    out.disparity += gamma.mass[g] * gamma.mass[g];
    out.relevance += gamma.mass[g] * gamma_star.mass[g];
  }
  out.relevance *= 2.0;
  return out;
}

TargetMode parse_target_mode(std::string_view text) {
  if (text == "qrels") return TargetMode::kQrels;
  if (text == "uniform") return TargetMode::kUniform;
  if (text == "fixed" || text == "file") return TargetMode::kFixed;
  throw Error(ErrorCode::kConfigError,
              "unknown target mode '" + std::string(text) + "'");
}

std::string awrf_metric_name(std::string_view scheme, bool complement) {
  return std::string(complement ? "awrf_complement:" : "awrf:") +
         std::string(scheme);
}

namespace {

struct EvaluatedScheme {
  std::string name;                     // scheme name or "overall"
  std::vector<std::string> components;  // one entry unless intersectional
  MembershipLookup lookup;
};

std::vector<double> kronecker(const std::vector<double>& a,
                              const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() * b.size());
  for (double x : a) {
    for (double y : b) out.push_back(x * y);
  }
  return out;
}

std::vector<double> fixed_target(const EvaluationConfig& config,
                                 const EvaluatedScheme& scheme,
                                 const GroupMembershipTable& table) {
  auto it = config.fixed_targets.find(scheme.name);
  if (it != config.fixed_targets.end()) {
    const auto v = normalize(it->second, scheme.lookup.scheme());
    return {v.weights().begin(), v.weights().end()};
  }
  if (scheme.components.size() < 2) {
    throw Error(ErrorCode::kConfigError,
                "no fixed target given for scheme '" + scheme.name + "'");
  }
  std::vector<double> out{1.0};
  for (const auto& c : scheme.components) {
    auto ct = config.fixed_targets.find(c);
    if (ct == config.fixed_targets.end()) {
      throw Error(ErrorCode::kConfigError,
                  "no fixed target given for scheme '" + c + "'");
    }
    const auto v = normalize(ct->second, table.scheme(c));
    out = kronecker(out, {v.weights().begin(), v.weights().end()});
  }
  return out;
}

std::vector<double> uniform_target(const EvaluationConfig& config,
                                   const EvaluatedScheme& scheme,
                                   const GroupMembershipTable& table) {
  std::vector<double> out{1.0};
  for (const auto& c : scheme.components) {
    out = kronecker(out,
                    target_uniform(table.scheme(c), config.exclude_unknown).mass);
  }
  return out;
}

double worst_case(Divergence kind, const std::vector<double>& target) {
  if (kind == Divergence::kJs) return std::numbers::ln2;
  double worst = 0.0;
  std::vector<double> one_hot(target.size(), 0.0);
  for (std::size_t g = 0; g < target.size(); ++g) {
    one_hot[g] = 1.0;
    worst = std::max(worst, kl_divergence(one_hot, target));
    one_hot[g] = 0.0;
  }
  return worst;
}

std::string base_query(const std::string& qid, std::optional<char> separator) {
  if (!separator) return qid;
  const auto pos = qid.rfind(*separator);
  return pos == std::string::npos ? qid : qid.substr(0, pos);
}

// Per evaluation query and scheme: normalized target, worst-case value and,
// when expected exposure is on, the target exposure.
struct QueryTargets {
  std::vector<std::vector<double>> target;
  std::vector<double> worst;
  std::vector<ExposureVector> gamma_star;
};

}  // namespace

ReportSet evaluate_runset(const RunSet& runs, const Qrels* qrels,
                          const GroupMembershipTable& table,
                          std::span<const std::string> schemes,
                          const EvaluationConfig& config) {
  if (schemes.empty()) {
    throw Error(ErrorCode::kConfigError, "no scheme to evaluate");
  }
  for (const auto& s : schemes) {
    if (!table.has_scheme(s)) {
      throw Error(ErrorCode::kConfigError, "unknown scheme '" + s + "'");
    }
    if (s == kOverallScheme) {
      throw Error(ErrorCode::kConfigError,
                  "'overall' is reserved for the intersectional scheme");
    }
  }
  if ((config.target == TargetMode::kQrels || config.expected_exposure) &&
      qrels == nullptr) {
    throw Error(ErrorCode::kConfigError, "qrels are required");
  }
  if (config.complement && config.divergence != Divergence::kJs) {
    throw Error(ErrorCode::kConfigError, "the complement is defined for JS only");
  }

  std::vector<EvaluatedScheme> evaluated;
  for (const auto& s : schemes) {
    evaluated.push_back({s, {s}, MembershipLookup(table, s, config.fallback)});
  }
  if (config.overall && schemes.size() >= 2) {
    std::vector<std::string> all(schemes.begin(), schemes.end());
    evaluated.push_back({std::string(kOverallScheme), all,
                         MembershipLookup(table, all, config.fallback)});
  }

  std::vector<std::string> queries = config.queries;
  if (queries.empty()) {
    if (config.target == TargetMode::kQrels) {
      queries = qrels->query_ids();
    } else {
      std::set<std::string> ids;
      for (const auto& q : runs.query_ids()) {
        ids.insert(base_query(q, config.sequence_separator));
      }
      queries.assign(ids.begin(), ids.end());
    }
  }
  std::sort(queries.begin(), queries.end());
  queries.erase(std::unique(queries.begin(), queries.end()), queries.end());

  std::vector<std::vector<double>> corpus_targets;
  if (config.target == TargetMode::kQrels && config.corpus_target) {
    for (const auto& e : evaluated) {
      corpus_targets.push_back(
          target_from_qrels_corpus(*qrels, e.lookup, config.relevance).mass);
    }
  }

  std::vector<QueryTargets> targets(queries.size());
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    auto& t = targets[qi];
    for (std::size_t si = 0; si < evaluated.size(); ++si) {
      const auto& e = evaluated[si];
      std::vector<double> target;
      switch (config.target) {
        case TargetMode::kQrels:
          target = config.corpus_target
                       ? corpus_targets[si]
                       : target_from_qrels(*qrels, queries[qi], e.lookup,
                                           config.relevance)
                             .mass;
          break;
        case TargetMode::kUniform:
          target = uniform_target(config, e, table);
          break;
        case TargetMode::kFixed:
          target = fixed_target(config, e, table);
          break;
      }
      t.worst.push_back(worst_case(config.divergence, target));
      t.target.push_back(std::move(target));
      if (config.expected_exposure) {
        t.gamma_star.push_back(target_group_exposure(*qrels, queries[qi],
                                                     e.lookup, config.attention));
      }
    }
  }

  const auto tags = runs.system_tags();
  std::vector<MetricReport> reports(tags.size());
  parallel_for(tags.size(), config.threads, [&](std::size_t i) {
    MetricReport& report = reports[i];
    report.system = tags[i];
    std::map<std::string, std::vector<const Ranking*>> sequences;
    for (const auto& [qid, ranking] : runs.systems().find(tags[i])->second) {
      sequences[base_query(qid, config.sequence_separator)].push_back(&ranking);
    }
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      auto& row = report.per_query[queries[qi]];
      auto seq = sequences.find(queries[qi]);
      const bool missing = seq == sequences.end();
      if (missing) report.missing_queries.insert(queries[qi]);
      for (std::size_t si = 0; si < evaluated.size(); ++si) {
        const auto& e = evaluated[si];
        ExposureVector gamma{e.lookup.scheme(),
                             std::vector<double>(e.lookup.scheme()->size(), 0.0),
                             false};
        double value = targets[qi].worst[si];
        if (!missing) {
          gamma = expected_group_exposure(seq->second, e.lookup, config.attention);
          value = divergence(config.divergence, gamma.to_normalized().mass,
                             targets[qi].target[si]);
        }
        if (config.complement) value = 1.0 - value / std::numbers::ln2;
        row[awrf_metric_name(e.name, config.complement)] = value;
        if (config.expected_exposure) {
          const auto ee = ee_metrics(gamma, targets[qi].gamma_star[si]);
          row["ee_l:" + e.name] = ee.loss;
          row["ee_d:" + e.name] = ee.disparity;
          row["ee_r:" + e.name] = ee.relevance;
        }
      }
    }
    std::map<std::string, double> sums;
    std::map<std::string, std::size_t> counts;
    for (const auto& [qid, row] : report.per_query) {
      for (const auto& [metric, value] : row) {
        sums[metric] += value;
        ++counts[metric];
      }
    }
    for (const auto& [metric, sum] : sums) {
      report.aggregate[metric] = sum / static_cast<double>(counts[metric]);
    }
  });

  ReportSet out;
  for (auto& r : reports) {
    std::string tag = r.system;
    out.emplace(std::move(tag), std::move(r));
  }
  return out;
}

std::string reports_to_csv(const ReportSet& reports) {
  std::ostringstream out;
  out << "system,query,metric,value\n";
  for (const auto& [system, report] : reports) {
    for (const auto& [qid, row] : report.per_query) {
      for (const auto& [metric, value] : row) {
        out << system << ',' << qid << ',' << metric << ','
            << format_double(value) << '\n';
      }
    }
  }
  return out.str();
}

std::string aggregates_to_csv(const ReportSet& reports) {
  std::ostringstream out;
  out << "system,metric,value\n";
  for (const auto& [system, report] : reports) {
    for (const auto& [metric, value] : report.aggregate) {
      out << system << ',' << metric << ',' << format_double(value) << '\n';
    }
  }
  return out.str();
}

std::string reports_to_json(const ReportSet& reports) {
  nlohmann::ordered_json root;
  root["systems"] = nlohmann::ordered_json::array();
  for (const auto& [system, report] : reports) {
    nlohmann::ordered_json j;
    j["system"] = system;
    j["aggregate"] = report.aggregate;
    j["missing_queries"] = report.missing_queries;
    j["queries"] = report.per_query;
    root["systems"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

ReportSet reports_from_json(std::string_view text) {
  ReportSet out;
  try {
    const auto root = nlohmann::json::parse(text);
    for (const auto& j : root.at("systems")) {
      MetricReport r;
      r.system = j.at("system").get<std::string>();
      r.aggregate = j.at("aggregate").get<std::map<std::string, double>>();
      r.missing_queries = j.value("missing_queries", std::set<std::string>{});
      r.per_query = j.at("queries")
                        .get<std::map<std::string, std::map<std::string, double>>>();
      std::string tag = r.system;
      if (!out.emplace(std::move(tag), std::move(r)).second) {
        throw Error(ErrorCode::kConfigError,
                    "system '" + j.at("system").get<std::string>() +
                        "' reported twice");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError,
                std::string("malformed metric report: ") + e.what());
  }
  return out;
}

}  // namespace fairgm
