/*
 * Copyright (C) 2026 The csreply Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "csreply/error.h"

namespace csreply {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kEmptyInput:
      return "EmptyInput";
    case ErrorCode::kParseError:
      return "ParseError";
    case ErrorCode::kIoError:
      return "IoError";
    case ErrorCode::kDegenerateVector:
      return "DegenerateVector";
    case ErrorCode::kNumericalError:
      return "NumericalError";
    case ErrorCode::kMissingTranslations:
      return "MissingTranslations";
    case ErrorCode::kEmptyCorpus:
      return "EmptyCorpus";
    case ErrorCode::kEmptyResponseSet:
      return "EmptyResponseSet";
    case ErrorCode::kTooFewPoints:
      return "TooFewPoints";
    case ErrorCode::kIntegrityError:
      return "IntegrityError";
    case ErrorCode::kTruthNotInSet:
      return "TruthNotInSet";
    case ErrorCode::kEmptyRanks:
      return "EmptyRanks";
    case ErrorCode::kConfigError:
      return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + detail),
      code_(code) {}

}  // namespace csreply
