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

#ifndef CSREPLY_TEXTPROC_H_
#define CSREPLY_TEXTPROC_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace csreply {

// A lowercase text unit: a word, or a single punctuation mark from the split
// set {. , ; : ! ? —}.
using Token = std::string;
using TokenSeq = std::vector<Token>;
using TokenId = int32_t;
using IdSeq = std::vector<TokenId>;

// Byte range [begin, end) of a token in the original text.
struct TokenSpan {
  size_t begin = 0;
  size_t end = 0;
};

TokenSeq Tokenize(std::string_view text);
// Same as Tokenize, also reporting where each token came from in `text`.
TokenSeq Tokenize(std::string_view text, std::vector<TokenSpan>* spans);

bool IsPunctuationToken(std::string_view token);

std::string JoinTokens(std::span<const Token> tokens);
// tokenize-then-join; the canonical form used for uniqueness and lookups.
std::string NormalizeText(std::string_view text);

class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocab();

  // Ids are assigned by descending frequency, ties broken lexicographically.
  // Tokens seen fewer than `min_count` times are left out and map to kUnk.
  static Vocab Build(std::span<const TokenSeq> corpus, int min_count);

  // Rebuilds a vocabulary from its id-ordered token list (checkpoint load).
  static Vocab FromTokenList(std::vector<std::string> tokens, int min_count);

  TokenId Lookup(std::string_view token) const;
  const Token& TokenOf(TokenId id) const { return token_of_.at(id); }
  size_t size() const { return token_of_.size(); }
  int min_count() const { return min_count_; }
  const std::vector<Token>& tokens() const { return token_of_; }

 private:
  std::vector<Token> token_of_;
  std::unordered_map<Token, TokenId> id_of_;
  int min_count_ = 1;
};

IdSeq EncodeIds(std::span<const Token> tokens, const Vocab& vocab);

struct Clause {
  TokenSeq tokens;
  // [begin, end) token indices into the parent sequence.
  size_t begin = 0;
  size_t end = 0;
};

struct SegmenterOptions {
  std::vector<std::string> conjunctions = {"and", "but", "or", "because",
                                           "so"};
};

// Splits after , ; : . tokens and before a conjunction that is not the first
// token. The returned spans partition `tokens` in order.
std::vector<Clause> SegmentClauses(std::span<const Token> tokens,
                                   const SegmenterOptions& options = {});

}  // namespace csreply

#endif  // CSREPLY_TEXTPROC_H_
