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

#ifndef CSREPLY_RESPONSESET_H_
#define CSREPLY_RESPONSESET_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csreply/codeswitch.h"
#include "csreply/encoder.h"
#include "csreply/textproc.h"
#include "json.hpp"

namespace csreply {

struct ResponseEntry {
  std::string text;  // normalized
  IdSeq token_ids;   // empty when loaded without a vocabulary
  Embedding vector;  // reply-side, unit norm
  int64_t count = 0;
  double lm_score = 0.0;  // log(count / total kept count)
  int intent_id = 0;
};

// The precomputed candidate pool. Inference only ever ranks these entries.
struct ResponseSet {
  std::vector<ResponseEntry> entries;
  std::string built_from;
  int k_intents = 1;

  size_t size() const { return entries.size(); }
  // Index of the entry whose text equals NormalizeText(text), if any.
  std::optional<size_t> Find(std::string_view text) const;
};

enum class IntentSource { kKMeans, kSentiment };

struct ResponseSetOptions {
  int min_count = 1;
  int max_size = 2000;
  int k_intents = 8;
  uint64_t seed = 42;
  IntentSource intent_source = IntentSource::kKMeans;

  void Validate() const;
};

// Label order used for sentiment intents.
const std::vector<std::string>& SentimentLabels();
// Case-insensitive; "Disgusted" is accepted for "Disguised".
std::optional<int> SentimentIntent(std::string_view label);

std::string CorpusFingerprint(std::span<const MRPair> corpus);

ResponseSet BuildResponseSet(std::span<const MRPair> corpus,
                             const EncoderParams& params, const Vocab& vocab,
                             const ResponseSetOptions& options);

struct KMeansResult {
  std::vector<int> assignment;
  // Sum of squared distances to assigned centers after each iteration.
  std::vector<double> objective_history;
  int iterations = 0;
};

// Spherical k-means: k-means++ seeding, Euclidean assignment, mean then
// renormalize. Stops at an assignment fixpoint or after 100 iterations.
KMeansResult AssignIntents(std::span<const Embedding> vectors, int k,
                           uint64_t seed);

// {"version":1, "k_intents", "built_from",
//  "entries":[{"text","count","lm_score","intent_id","vector"}], "meta"?}
std::string SerializeResponseSet(
    const ResponseSet& set,
    const nlohmann::ordered_json& meta = nlohmann::ordered_json::object());
// Rejects files that violate the set invariants with IntegrityError. When a
// vocabulary is given, token ids are filled in.
ResponseSet ParseResponseSet(std::string_view text,
                             const Vocab* vocab = nullptr);
void SaveResponseSet(
    const std::string& path, const ResponseSet& set,
    const nlohmann::ordered_json& meta = nlohmann::ordered_json::object());
ResponseSet LoadResponseSet(const std::string& path,
                            const Vocab* vocab = nullptr);

}  // namespace csreply

#endif  // CSREPLY_RESPONSESET_H_
