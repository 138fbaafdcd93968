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
// Random valid inputs for round-trip tests.
#ifndef FAIRGM_TESTS_GENERATORS_HPP_
#define FAIRGM_TESTS_GENERATORS_HPP_

#include <random>
#include <string>
#include <vector>

#include "fairgm/core.hpp"

namespace gen {

inline std::string random_id(std::mt19937_64& rng, std::string_view prefix) {
  static constexpr char kChars[] = "abcdefghijklmnopqrstuvwxyz0123456789_-.";
  std::uniform_int_distribution<std::size_t> len(1, 8);
  std::uniform_int_distribution<std::size_t> pick(0, sizeof(kChars) - 2);
  std::string s(prefix);
  for (std::size_t i = len(rng); i > 0; --i) s += kChars[pick(rng)];
  return s;
}

inline double random_score(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  switch (kind(rng)) {
    case 0: return std::floor(u(rng));
    case 1: return u(rng) * 1e-7;
    case 2: return u(rng) * 1e12;
    default: return u(rng);
  }
}

inline fairgm::RunSet random_runset(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_int_distribution<int> length(1, 25);
  fairgm::RunSet runs;
  const int systems = count(rng);
  for (int s = 0; s < systems; ++s) {
    const std::string tag = "sys" + std::to_string(s) + random_id(rng, "");
    const int queries = count(rng);
    for (int q = 0; q < queries; ++q) {
      std::vector<fairgm::RankedDocument> entries;
      const int n = length(rng);
      for (int i = 0; i < n; ++i) {
        entries.push_back({"d" + std::to_string(i) + random_id(rng, "_"),
                           random_score(rng)});
      }
      runs.add(fairgm::Ranking("q" + std::to_string(q), tag, std::move(entries)));
    }
  }
  return runs;
}

inline fairgm::Qrels random_qrels(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(0, 5);
  std::uniform_int_distribution<int> docs(1, 30);
  std::uniform_int_distribution<int> grade(0, 4);
  fairgm::Qrels qrels;
  const int queries = count(rng);
  for (int q = 0; q < queries; ++q) {
    const std::string qid = random_id(rng, "q");
    const int n = docs(rng);
    for (int i = 0; i < n; ++i) {
      const std::string doc = "d" + std::to_string(i) + random_id(rng, "-");
      if (!qrels.grade(qid, doc)) qrels.add(qid, doc, grade(rng));
    }
  }
  return qrels;
}

inline std::vector<fairgm::SchemePtr> test_schemes() {
  return {fairgm::make_scheme("gender",
                              {"male", "female", "non-binary", "unknown"}, 3),
          fairgm::make_scheme("geo", {"africa", "americas", "asia", "europe",
                                      "oceania", "unknown"},
                              5)};
}

inline fairgm::GroupMembershipTable random_table(
    std::mt19937_64& rng, const std::vector<fairgm::SchemePtr>& schemes) {
  std::uniform_int_distribution<int> docs(0, 40);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  fairgm::GroupMembershipTable table;
  for (const auto& scheme : schemes) {
    table.add_scheme(scheme);
    const int n = docs(rng);
    for (int i = 0; i < n; ++i) {
      const std::string doc = "doc" + std::to_string(i) + random_id(rng, "");
      if (u(rng) < 0.6) {
        std::uniform_int_distribution<std::size_t> g(0, scheme->size() - 1);
        table.assign(doc, fairgm::MembershipVector::one_hot(scheme, g(rng)));
      } else {
        std::vector<double> raw(scheme->size());
        for (auto& w : raw) w = u(rng) < 0.4 ? 0.0 : u(rng);
        raw[0] += 1e-3;
        table.assign(doc, fairgm::normalize(raw, scheme));
      }
    }
  }
  return table;
}

}  // namespace gen

#endif  // FAIRGM_TESTS_GENERATORS_HPP_
