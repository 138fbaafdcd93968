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
#include <stdexcept>
#include <string>
#include <string_view>

namespace fairgm {

enum class ErrorCode {
  kInvalidArgument,
  kZeroMass,
  kLengthMismatch,
  kMissingDocument,
  kNoUnknownGroup,
  kMalformedLine,
  kDuplicateDocument,
  kNonNumericField,
  kNegativeGrade,
  kDuplicateJudgment,
  kUnknownScheme,
  kUnknownLabel,
  kInsufficientDocuments,
  kInvalidPatience,
  kNoRelevantDocuments,
  kNoJudgedDocuments,
  kNotADistribution,
  kConfigError,
  kAccuracyOutOfRange,
  kConstantInput,
  kTooFewSamples,
  kSystemSetMismatch,
  kQuerySetMismatch,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library surfaces as this exception. Parsers attach the
// 1-based line number of the offending input line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  // The message without the code and line decoration.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::optional<std::size_t> line_;
};

}  // namespace fairgm
