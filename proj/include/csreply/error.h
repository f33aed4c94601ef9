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

#ifndef CSREPLY_ERROR_H_
#define CSREPLY_ERROR_H_

#include <stdexcept>
#include <string>

namespace csreply {

enum class ErrorCode {
  kInvalidArgument,
  kEmptyInput,
  kParseError,
  kIoError,
  kDegenerateVector,
  kNumericalError,
  kMissingTranslations,
  kEmptyCorpus,
  kEmptyResponseSet,
  kTooFewPoints,
  kIntegrityError,
  kTruthNotInSet,
  kEmptyRanks,
  kConfigError,
};

const char* ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception type. The code
// identifies the failure class; what() carries a human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace csreply

#endif  // CSREPLY_ERROR_H_
