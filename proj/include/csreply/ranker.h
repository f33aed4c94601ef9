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

#ifndef CSREPLY_RANKER_H_
#define CSREPLY_RANKER_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csreply/encoder.h"
#include "csreply/responseset.h"
#include "csreply/textproc.h"

namespace csreply {

struct RankConfig {
  double alpha = 0.3;  // weight of the popularity (LM) term
  int n1 = 30;         // pre-selection size
  int n2 = 3;          // suggestions returned
  double jaccard_threshold = 0.5;

  void Validate() const;
};

struct Suggestion {
  std::string text;
  double score = 0.0;
  int intent_id = 0;
  size_t entry_index = 0;
};

// score[k] = m . v_k + alpha * lm_k.
std::vector<double> ScoreAll(const Embedding& message, const ResponseSet& set,
                             double alpha);

// Indices of the n1 best scores, best first, lower index first on ties.
std::vector<size_t> TopN1(std::span<const double> scores, int n1);

double TokenSetJaccard(std::string_view a, std::string_view b);

// Greedy clustering in score order; a candidate joins the first cluster whose
// representative has Jaccard >= threshold. Returns representatives in order.
std::vector<size_t> LexicalDedup(std::span<const size_t> candidates,
                                 const ResponseSet& set, double threshold);

// Takes the top representative, then forces a second intent on the next pick
// when one is available; remaining slots follow score order. Returns picks in
// the order they were made.
std::vector<size_t> Diversify(std::span<const size_t> representatives,
                              const ResponseSet& set, int n2);

// Full pipeline for one incoming message; output sorted by descending score.
std::vector<Suggestion> Suggest(std::string_view message,
                                const EncoderParams& params, const Vocab& vocab,
                                const ResponseSet& set,
                                const RankConfig& config);

}  // namespace csreply

#endif  // CSREPLY_RANKER_H_
