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

#include "csreply/textproc.h"

#include <locale.h>
#include <wctype.h>

#include <algorithm>
#include <map>

#include "csreply/error.h"

namespace csreply {
namespace {

constexpr char32_t kEmDash = 0x2014;

locale_t Utf8Locale() {
  static const locale_t locale = newlocale(LC_CTYPE_MASK, "C.UTF-8", nullptr);
  return locale;
}

bool IsSpace(char32_t c) {
  if (c < 0x80) return c == ' ' || (c >= '\t' && c <= '\r');
  const locale_t locale = Utf8Locale();
  return locale != nullptr && iswspace_l(static_cast<wint_t>(c), locale);
}

char32_t ToLower(char32_t c) {
  if (c < 0x80) return (c >= 'A' && c <= 'Z') ? c + ('a' - 'A') : c;
  const locale_t locale = Utf8Locale();
  if (locale == nullptr) return c;
  return static_cast<char32_t>(towlower_l(static_cast<wint_t>(c), locale));
}

bool IsSplitPunctuation(char32_t c) {
  switch (c) {
    case '.':
    case ',':
    case ';':
    case ':':
    case '!':
    case '?':
    case kEmDash:
      return true;
    default:
      return false;
  }
}

void AppendUtf8(char32_t c, std::string* out) {
  if (c < 0x80) {
    out->push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out->push_back(static_cast<char>(0xC0 | (c >> 6)));
    out->push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out->push_back(static_cast<char>(0xE0 | (c >> 12)));
    out->push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out->push_back(static_cast<char>(0xF0 | (c >> 18)));
    out->push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

// Decodes one code point starting at text[pos]. Returns its byte length, or 0
// if the bytes are not valid UTF-8 (the caller then copies one raw byte).
size_t DecodeUtf8(std::string_view text, size_t pos, char32_t* out) {
  const auto byte = [&](size_t i) {
    return static_cast<unsigned char>(text[pos + i]);
  };
  const unsigned char lead = byte(0);
  size_t len;
  char32_t c;
  if (lead < 0x80) {
    *out = lead;
    return 1;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
    c = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    c = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    c = lead & 0x07;
  } else {
    return 0;
  }
  if (pos + len > text.size()) return 0;
  for (size_t i = 1; i < len; ++i) {
    if ((byte(i) & 0xC0) != 0x80) return 0;
    c = (c << 6) | (byte(i) & 0x3F);
  }
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (c < kMin[len] || c > 0x10FFFF || (c >= 0xD800 && c <= 0xDFFF)) return 0;
  *out = c;
  return len;
}

}  // namespace

TokenSeq Tokenize(std::string_view text) { return Tokenize(text, nullptr); }

TokenSeq Tokenize(std::string_view text, std::vector<TokenSpan>* spans) {
  TokenSeq tokens;
  if (spans != nullptr) spans->clear();
  std::string current;
  size_t current_begin = 0;
  const auto flush = [&](size_t end) {
    if (current.empty()) return;
    tokens.push_back(std::move(current));
    current.clear();
    if (spans != nullptr) spans->push_back({current_begin, end});
  };

  size_t pos = 0;
  while (pos < text.size()) {
    char32_t c = 0;
    const size_t len = DecodeUtf8(text, pos, &c);
    if (len == 0) {
      // Invalid byte: kept verbatim as part of the current word.
      if (current.empty()) current_begin = pos;
      current.push_back(text[pos]);
      ++pos;
      continue;
    }
    if (IsSpace(c)) {
      flush(pos);
    } else if (IsSplitPunctuation(c)) {
      flush(pos);
      std::string mark;
      AppendUtf8(c, &mark);
      tokens.push_back(std::move(mark));
      if (spans != nullptr) spans->push_back({pos, pos + len});
    } else {
      if (current.empty()) current_begin = pos;
      AppendUtf8(ToLower(c), &current);
    }
    pos += len;
  }
  flush(pos);
  return tokens;
}

bool IsPunctuationToken(std::string_view token) {
  char32_t c = 0;
  if (token.empty()) return false;
  const size_t len = DecodeUtf8(token, 0, &c);
  return len == token.size() && IsSplitPunctuation(c);
}

std::string JoinTokens(std::span<const Token> tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string NormalizeText(std::string_view text) {
  return JoinTokens(Tokenize(text));
}

Vocab::Vocab() {
  token_of_ = {Token(kPadToken), Token(kUnkToken)};
  id_of_.emplace(token_of_[kPad], kPad);
  id_of_.emplace(token_of_[kUnk], kUnk);
}

Vocab Vocab::Build(std::span<const TokenSeq> corpus, int min_count) {
  if (min_count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "min_count must be >= 1");
  }
  std::map<Token, int64_t> counts;
  for (const TokenSeq& seq : corpus) {
    for (const Token& token : seq) ++counts[token];
  }
  std::vector<std::pair<Token, int64_t>> ranked;
  for (auto& [token, count] : counts) {
    if (count < min_count) continue;
    if (token == kPadToken || token == kUnkToken) continue;
    ranked.emplace_back(token, count);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  Vocab vocab;
  vocab.min_count_ = min_count;
  for (auto& [token, count] : ranked) {
    vocab.id_of_.emplace(token, static_cast<TokenId>(vocab.token_of_.size()));
    vocab.token_of_.push_back(token);
  }
  return vocab;
}

Vocab Vocab::FromTokenList(std::vector<std::string> tokens, int min_count) {
  if (tokens.size() < 2 || tokens[kPad] != kPadToken ||
      tokens[kUnk] != kUnkToken) {
    throw Error(ErrorCode::kIntegrityError,
                "vocab must start with reserved <pad>, <unk>");
  }
  Vocab vocab;
  vocab.min_count_ = min_count;
  for (size_t i = 2; i < tokens.size(); ++i) {
    if (tokens[i].empty() ||
        !vocab.id_of_.emplace(tokens[i], static_cast<TokenId>(i)).second) {
      throw Error(ErrorCode::kIntegrityError,
                  "duplicate or empty vocab token at id " + std::to_string(i));
    }
    vocab.token_of_.push_back(std::move(tokens[i]));
  }
  return vocab;
}

TokenId Vocab::Lookup(std::string_view token) const {
  auto it = id_of_.find(Token(token));
  return it == id_of_.end() ? kUnk : it->second;
}

IdSeq EncodeIds(std::span<const Token> tokens, const Vocab& vocab) {
  IdSeq ids;
  ids.reserve(tokens.size());
  for (const Token& token : tokens) ids.push_back(vocab.Lookup(token));
  return ids;
}

std::vector<Clause> SegmentClauses(std::span<const Token> tokens,
                                   const SegmenterOptions& options) {
  if (tokens.empty()) {
    throw Error(ErrorCode::kEmptyInput, "cannot segment an empty sequence");
  }
  const auto is_conjunction = [&](const Token& token) {
    return std::find(options.conjunctions.begin(), options.conjunctions.end(),
                     token) != options.conjunctions.end();
  };
  const auto closes_clause = [](const Token& token) {
    return token == "," || token == ";" || token == ":" || token == ".";
  };

  std::vector<Clause> clauses;
  size_t begin = 0;
  for (size_t i = 1; i <= tokens.size(); ++i) {
    const bool boundary =
        i == tokens.size() || closes_clause(tokens[i - 1]) ||
        is_conjunction(tokens[i]);
    if (!boundary) continue;
    Clause clause;
    clause.begin = begin;
    clause.end = i;
    clause.tokens.assign(tokens.begin() + begin, tokens.begin() + i);
    clauses.push_back(std::move(clause));
    begin = i;
  }
  return clauses;
}

}  // namespace csreply
