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
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace fairgm {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Splits on runs of spaces/tabs; leading and trailing blanks are ignored.
std::vector<std::string_view> split_blanks(std::string_view line);
std::vector<std::string_view> split(std::string_view text, char sep);

// Stable 64-bit mixing, independent of std::hash and of platform.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_string(std::string_view text, std::uint64_t seed = 0);
std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t salt);
// Maps 64 random bits to [0, 1).
double to_unit_interval(std::uint64_t bits);

// Runs fn(i) for i in [0, n). threads <= 1 runs inline; 0 means hardware
// concurrency. Callers write results by index, so output order never depends
// on scheduling. The first exception thrown by any task is rethrown.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace fairgm
