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
#include "fairgm/error.hpp"

namespace fairgm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kZeroMass: return "ZeroMass";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kMissingDocument: return "MissingDocument";
    case ErrorCode::kNoUnknownGroup: return "NoUnknownGroup";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kDuplicateDocument: return "DuplicateDocument";
    case ErrorCode::kNonNumericField: return "NonNumericField";
    case ErrorCode::kNegativeGrade: return "NegativeGrade";
    case ErrorCode::kDuplicateJudgment: return "DuplicateJudgment";
    case ErrorCode::kUnknownScheme: return "UnknownScheme";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kInsufficientDocuments: return "InsufficientDocuments";
    case ErrorCode::kInvalidPatience: return "InvalidPatience";
    case ErrorCode::kNoRelevantDocuments: return "NoRelevantDocuments";
    case ErrorCode::kNoJudgedDocuments: return "NoJudgedDocuments";
    case ErrorCode::kNotADistribution: return "NotADistribution";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kAccuracyOutOfRange: return "AccuracyOutOfRange";
    case ErrorCode::kConstantInput: return "ConstantInput";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kSystemSetMismatch: return "SystemSetMismatch";
    case ErrorCode::kQuerySetMismatch: return "QuerySetMismatch";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

namespace {
std::string decorate(ErrorCode code, const std::string& message,
                     std::optional<std::size_t> line) {
  std::string out(to_string(code));
  if (line) out += " at line " + std::to_string(*line);
  if (!message.empty()) out += ": " + message;
  return out;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(decorate(code, message, line)),
      code_(code),
      message_(message),
      line_(line) {}

}  // namespace fairgm
