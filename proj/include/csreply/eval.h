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

#ifndef CSREPLY_EVAL_H_
#define CSREPLY_EVAL_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csreply/codeswitch.h"
#include "csreply/encoder.h"
#include "csreply/responseset.h"
#include "json.hpp"

namespace csreply {

// One row of the ranking experiment (model, MRR, latency).
struct EvalReport {
  std::string model_name;
  double mrr = 0.0;
  size_t n_queries = 0;
  size_t n_skipped = 0;  // queries whose true reply is not in the set
  size_t response_set_size = 0;
  double latency_mean_ms = 0.0;
  double latency_p95_ms = 0.0;
  double baseline_mrr_closed_form = 0.0;
  // Ties never worsen a rank: rank = 1 + #entries scoring strictly higher.
  std::string tie_rule = "optimistic";

  bool operator==(const EvalReport&) const = default;
};

nlohmann::ordered_json ReportToJson(const EvalReport& report);
EvalReport ReportFromJson(const nlohmann::json& j);
// "model,mrr,latency_mean_ms" header, a random-baseline row, the model row.
std::string ReportCsv(const EvalReport& report);

// 1 + number of scores strictly greater than scores[truth].
size_t RankAmong(std::span<const double> scores, size_t truth);

// Throws TruthNotInSet when the reply is not in the response set.
size_t RankOfTruth(std::string_view message, std::string_view true_reply,
                   const EncoderParams& params, const Vocab& vocab,
                   const ResponseSet& set, double alpha);

double Mrr(std::span<const size_t> ranks);

// H_n / n: expected reciprocal rank when the truth lands uniformly at random.
double RandomBaselineMrr(size_t set_size);

struct EvalOptions {
  std::string model_name = "bi-encoder";
  double alpha = 0.3;
};

EvalReport RunEval(std::span<const MRPair> test_corpus,
                   const EncoderParams& params, const Vocab& vocab,
                   const ResponseSet& set, const EvalOptions& options);

}  // namespace csreply

#endif  // CSREPLY_EVAL_H_
