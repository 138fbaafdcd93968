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
#include "fairgm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

#include "fairgm/util.hpp"
#include "json.hpp"

namespace fairgm {

double correlation_p_value(double r, std::size_t n) {
  if (n < 3) {
    throw Error(ErrorCode::kTooFewSamples, "need at least 3 samples");
  }
  const double ar = std::min(1.0, std::abs(r));
  if (ar >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t2 = ar * ar * df / (1.0 - ar * ar);
  // P(|T| >= t) = I_{df / (df + t^2)}(df / 2, 1 / 2)
  return boost::math::ibeta(0.5 * df, 0.5, df / (df + t2));
}

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(x.size()) + " vs " + std::to_string(y.size()) +
                    " samples");
  }
  if (x.size() < 3) {
    throw Error(ErrorCode::kTooFewSamples,
                "need at least 3 samples, got " + std::to_string(x.size()));
  }
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pearson_coefficient(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::kConstantInput, "correlation of a constant vector");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const double r = pearson_coefficient(x, y);
  return {r, correlation_p_value(r, x.size()), x.size()};
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) hold ranks i+1..j+1
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman_permutation_p_value(std::span<const double> x,
                                    std::span<const double> y) {
  check_pair(x, y);
  if (x.size() >= 10) {
    throw Error(ErrorCode::kInvalidArgument,
                "exact permutation p-values are limited to n < 10");
  }
  const auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  const double observed = std::abs(pearson_coefficient(rx, ry));
  std::sort(ry.begin(), ry.end());
  std::size_t hits = 0;
  std::size_t total = 0;
  do {
    ++total;
    if (std::abs(pearson_coefficient(rx, ry)) >= observed - 1e-12) ++hits;
  } while (std::next_permutation(ry.begin(), ry.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

CorrelationResult spearman(std::span<const double> x, std::span<const double> y,
                           SpearmanPValue method) {
  check_pair(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double rho = pearson_coefficient(rx, ry);
  const double p = method == SpearmanPValue::kExactPermutation
                       ? spearman_permutation_p_value(x, y)
                       : correlation_p_value(rho, x.size());
  return {rho, p, x.size()};
}

namespace {

void fill_row(CorrelationRow& row, std::span<const double> x,
              std::span<const double> y, const CorrelationOptions& options) {
  row.n = x.size();
  try {
    row.pearson = pearson(x, y);
    row.spearman = spearman(x, y, options.spearman_p);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kConstantInput &&
        e.code() != ErrorCode::kTooFewSamples) {
      throw;
    }
    row.pearson.reset();
    row.spearman.reset();
    row.note = std::string(to_string(e.code()));
  }
}

}  // namespace

CorrelationTable correlation_report(const ReportSet& a, const ReportSet& b,
                                    CorrelationLevel level,
                                    const CorrelationOptions& options) {
  std::vector<std::string> systems;
  for (const auto& [s, r] : a) systems.push_back(s);
  {
    std::vector<std::string> other;
    for (const auto& [s, r] : b) other.push_back(s);
    if (systems != other) {
      throw Error(ErrorCode::kSystemSetMismatch,
                  "the two report sets cover different systems");
    }
  }
  std::set<std::string> metrics;
  for (const auto& [s, r] : a) {
    for (const auto& [m, v] : r.aggregate) metrics.insert(m);
  }
  for (const auto& s : systems) {
    const auto& ra = a.at(s);
    const auto& rb = b.at(s);
    for (const auto& m : metrics) {
      if (!ra.aggregate.contains(m) || !rb.aggregate.contains(m)) {
        throw Error(ErrorCode::kConfigError,
                    "metric '" + m + "' missing for system '" + s + "'");
      }
    }
    if (level == CorrelationLevel::kQuery) {
      bool same = ra.per_query.size() == rb.per_query.size();
      for (auto ia = ra.per_query.begin(), ib = rb.per_query.begin();
           same && ia != ra.per_query.end(); ++ia, ++ib) {
        same = ia->first == ib->first;
      }
      if (!same) {
        throw Error(ErrorCode::kQuerySetMismatch,
                    "system '" + s + "' was evaluated on different queries");
      }
    }
  }

  CorrelationTable table{level, options.alpha, {}};
  if (level == CorrelationLevel::kSystem) {
    if (systems.size() < 3) {
      throw Error(ErrorCode::kTooFewSamples,
                  "system-level correlation needs at least 3 systems");
    }
    for (const auto& m : metrics) {
      std::vector<double> x;
      std::vector<double> y;
      for (const auto& s : systems) {
        x.push_back(a.at(s).aggregate.at(m));
        y.push_back(b.at(s).aggregate.at(m));
      }
      CorrelationRow row{m, "", 0, {}, {}, {}};
      fill_row(row, x, y, options);
      table.rows.push_back(std::move(row));
    }
    return table;
  }

  std::set<std::string> queries;
  for (const auto& s : systems) {
    for (const auto& [q, row] : a.at(s).per_query) queries.insert(q);
  }
  for (const auto& m : metrics) {
    for (const auto& q : queries) {
      std::vector<double> x;
      std::vector<double> y;
      bool skip = false;
      for (const auto& s : systems) {
        const auto& ra = a.at(s);
        const auto& rb = b.at(s);
        if (options.exclude_missing &&
            (ra.missing_queries.contains(q) || rb.missing_queries.contains(q))) {
          skip = true;
          break;
        }
        auto qa = ra.per_query.find(q);
        auto qb = rb.per_query.find(q);
        if (qa == ra.per_query.end() || qb == rb.per_query.end()) continue;
        auto va = qa->second.find(m);
        auto vb = qb->second.find(m);
        if (va == qa->second.end() || vb == qb->second.end()) continue;
        x.push_back(va->second);
        y.push_back(vb->second);
      }
      if (skip) continue;
      CorrelationRow row{m, q, 0, {}, {}, {}};
      fill_row(row, x, y, options);
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

namespace {

std::string opt(const std::optional<CorrelationResult>& r, bool p_value) {
  if (!r) return "";
  return format_double(p_value ? r->p_value : r->coefficient);
}

nlohmann::ordered_json rows_to_json(const CorrelationTable& table) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json j;
    j["metric"] = row.metric;
    if (table.level == CorrelationLevel::kQuery) j["query"] = row.query;
    j["n"] = row.n;
    if (row.pearson) {
      j["pearson_r"] = row.pearson->coefficient;
      j["pearson_p"] = row.pearson->p_value;
      j["spearman_rho"] = row.spearman->coefficient;
      j["spearman_p"] = row.spearman->p_value;
    } else {
      j["pearson_r"] = nullptr;
      j["pearson_p"] = nullptr;
      j["spearman_rho"] = nullptr;
      j["spearman_p"] = nullptr;
      j["note"] = row.note;
    }
    j["pearson_significant"] = row.pearson_significant(table.alpha);
    j["spearman_significant"] = row.spearman_significant(table.alpha);
    rows.push_back(std::move(j));
  }
  return rows;
}

}  // namespace

std::string correlation_to_csv(const CorrelationTable& table) {
  std::ostringstream out;
  const bool query = table.level == CorrelationLevel::kQuery;
  out << "level,metric," << (query ? "query," : "")
      << "pearson_r,pearson_p,spearman_rho,spearman_p,significant\n";
  for (const auto& row : table.rows) {
    out << (query ? "query" : "system") << ',' << row.metric << ',';
    if (query) out << row.query << ',';
    out << opt(row.pearson, false) << ',' << opt(row.pearson, true) << ','
        << opt(row.spearman, false) << ',' << opt(row.spearman, true) << ','
        << (row.pearson ? (row.pearson_significant(table.alpha) ? "*" : "") : "")
        << '\n';
  }
  return out.str();
}

std::string correlation_to_json(const CorrelationTable& system,
                                const CorrelationTable& query) {
  nlohmann::ordered_json root;
  root["alpha"] = system.alpha;
  root["system_level"] = rows_to_json(system);
  root["query_level"] = rows_to_json(query);
  return root.dump(2) + "\n";
}

std::string correlation_to_text(const CorrelationTable& table) {
  std::ostringstream out;
  auto cell = [&](const std::optional<CorrelationResult>& r) {
    std::ostringstream c;
    if (!r) {
      c << "n/a";
    } else {
      c << std::fixed << std::setprecision(4) << r->coefficient
        << (r->p_value < table.alpha ? "*" : "");
    }
    return c.str();
  };
  out << std::left << std::setw(28) << "metric";
  if (table.level == CorrelationLevel::kQuery) out << std::setw(12) << "query";
  out << std::setw(12) << "Pearson" << std::setw(12) << "Spearman" << "n\n";
  for (const auto& row : table.rows) {
    out << std::left << std::setw(28) << row.metric;
    if (table.level == CorrelationLevel::kQuery) out << std::setw(12) << row.query;
    out << std::setw(12) << cell(row.pearson) << std::setw(12)
        << cell(row.spearman) << row.n << '\n';
  }
  out << "* p < " << format_double(table.alpha) << '\n';
  return out.str();
}

}  // namespace fairgm
