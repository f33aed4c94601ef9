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

#ifndef CSREPLY_CODESWITCH_H_
#define CSREPLY_CODESWITCH_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "csreply/textproc.h"
#include "csreply/util.h"
#include "json.hpp"

namespace csreply {

enum class Lang { kEn, kCs, kL2 };

const char* LangName(Lang lang);
Lang ParseLang(std::string_view name);

// One message-reply training example.
struct MRPair {
  std::string id;
  std::string message;
  std::string reply;
  Lang lang = Lang::kEn;
  std::optional<std::string> message_translation;
  std::optional<std::string> reply_translation;
  std::optional<std::string> sentiment;

  bool operator==(const MRPair&) const = default;
};

// Corpus files hold one JSON object per line:
//   {"id","message","reply","lang","message_translation"?,
//    "reply_translation"?,"sentiment"?}
nlohmann::ordered_json PairToJson(const MRPair& pair);
MRPair PairFromJson(const nlohmann::json& j);
std::string PairToJsonLine(const MRPair& pair);

std::vector<MRPair> ReadCorpus(std::istream& in);
std::vector<MRPair> ReadCorpusFile(const std::string& path);
void WriteCorpusFile(const std::string& path, const std::vector<MRPair>& pairs);

// Offline bilingual mapping. Keys and values are normalized text.
struct PhraseTable {
  std::unordered_map<std::string, std::string> clause_map;
  std::unordered_map<std::string, std::string> word_map;
};

struct PhraseTableLoad {
  PhraseTable table;
  // Rows whose key overrode an earlier row (last one wins).
  size_t duplicate_count = 0;
};

// Two tab-separated columns per row; '#' lines and blank lines are skipped.
// Multi-token left sides go to clause_map, single tokens to word_map. A
// single-token key with a multi-token value is an exact-match clause entry.
PhraseTableLoad ParsePhraseTable(std::istream& in);
PhraseTableLoad LoadPhraseTable(const std::string& path);

struct SwitchConfig {
  double p_switch = 0.3;
  uint64_t rng_seed = 42;
  SegmenterOptions segmenter;

  void Validate() const;
};

struct SubstitutionResult {
  std::string text;
  bool switched = false;
};

// Clause-level lookup first (trailing punctuation stripped, then re-attached);
// otherwise word-by-word replacement.
SubstitutionResult SubstituteClause(const Clause& clause,
                                    const PhraseTable& table);

struct SynthesisStats {
  size_t input_pairs = 0;
  size_t output_records = 0;
  size_t clauses = 0;
  size_t switched_clauses = 0;

  double switch_rate() const {
    return clauses == 0 ? 0.0
                        : static_cast<double>(switched_clauses) /
                              static_cast<double>(clauses);
  }
  nlohmann::ordered_json ToJson() const;
};

// Produces the code-switched variant of an English pair. One Bernoulli draw
// per clause, message clauses first, then reply clauses.
MRPair SynthesizePair(const MRPair& pair, const PhraseTable& table,
                      const SwitchConfig& config, Rng& rng,
                      SynthesisStats* stats = nullptr);

// Streams JSONL pairs from `in`, writing each English original followed by
// its code-switched variant to `out`.
SynthesisStats SynthesizeCorpus(std::istream& in, std::ostream& out,
                                const PhraseTable& table,
                                const SwitchConfig& config);

}  // namespace csreply

#endif  // CSREPLY_CODESWITCH_H_
