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

#include "csreply/codeswitch.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "csreply/error.h"

namespace csreply {
namespace {

std::optional<std::string> OptionalString(const nlohmann::json& j,
                                          const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorCode::kParseError,
                std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::string RequiredString(const nlohmann::json& j, const char* key) {
  auto value = OptionalString(j, key);
  if (!value) {
    throw Error(ErrorCode::kParseError,
                std::string("missing string field '") + key + "'");
  }
  return *value;
}

std::string_view TrimLineEnd(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
    line.remove_suffix(1);
  }
  return line;
}

bool IsBlank(std::string_view line) {
  return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

// Rewrites `text` clause by clause. Clauses that are not switched keep their
// original bytes, as do the gaps between clauses.
std::string SwitchText(const std::string& text, const PhraseTable& table,
                       const SwitchConfig& config, Rng& rng,
                       SynthesisStats* stats) {
  std::vector<TokenSpan> spans;
  const TokenSeq tokens = Tokenize(text, &spans);
  if (tokens.empty()) return text;
  const std::vector<Clause> clauses =
      SegmentClauses(tokens, config.segmenter);

  std::vector<std::optional<std::string>> replacements(clauses.size());
  bool any_switched = false;
  for (size_t c = 0; c < clauses.size(); ++c) {
    const bool candidate = rng.Bernoulli(config.p_switch);
    if (stats != nullptr) ++stats->clauses;
    if (!candidate) continue;
    SubstitutionResult result = SubstituteClause(clauses[c], table);
    if (!result.switched) continue;
    replacements[c] = std::move(result.text);
    any_switched = true;
    if (stats != nullptr) ++stats->switched_clauses;
  }
  if (!any_switched) return text;

  std::string out(text.substr(0, spans[clauses.front().begin].begin));
  for (size_t c = 0; c < clauses.size(); ++c) {
    const size_t first_byte = spans[clauses[c].begin].begin;
    const size_t last_byte = spans[clauses[c].end - 1].end;
    if (replacements[c]) {
      out += *replacements[c];
    } else {
      out.append(text, first_byte, last_byte - first_byte);
    }
    const size_t gap_end = c + 1 < clauses.size()
                               ? spans[clauses[c + 1].begin].begin
                               : text.size();
    out.append(text, last_byte, gap_end - last_byte);
  }
  return out;
}

}  // namespace

const char* LangName(Lang lang) {
  switch (lang) {
    case Lang::kEn:
      return "en";
    case Lang::kCs:
      return "cs";
    case Lang::kL2:
      return "l2";
  }
  return "en";
}

Lang ParseLang(std::string_view name) {
  if (name == "en") return Lang::kEn;
  if (name == "cs") return Lang::kCs;
  if (name == "l2") return Lang::kL2;
  throw Error(ErrorCode::kParseError,
              "unknown lang '" + std::string(name) + "'");
}

nlohmann::ordered_json PairToJson(const MRPair& pair) {
  nlohmann::ordered_json j;
  j["id"] = pair.id;
  j["message"] = pair.message;
  j["reply"] = pair.reply;
  j["lang"] = LangName(pair.lang);
  if (pair.message_translation) {
    j["message_translation"] = *pair.message_translation;
  }
  if (pair.reply_translation) j["reply_translation"] = *pair.reply_translation;
  if (pair.sentiment) j["sentiment"] = *pair.sentiment;
  return j;
}

MRPair PairFromJson(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kParseError, "record is not a JSON object");
  }
  MRPair pair;
  pair.id = RequiredString(j, "id");
  pair.message = RequiredString(j, "message");
  pair.reply = RequiredString(j, "reply");
  pair.lang = ParseLang(RequiredString(j, "lang"));
  pair.message_translation = OptionalString(j, "message_translation");
  pair.reply_translation = OptionalString(j, "reply_translation");
  pair.sentiment = OptionalString(j, "sentiment");
  return pair;
}

std::string PairToJsonLine(const MRPair& pair) {
  return PairToJson(pair).dump() + "\n";
}

std::vector<MRPair> ReadCorpus(std::istream& in) {
  std::vector<MRPair> pairs;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (IsBlank(line)) continue;
    try {
      pairs.push_back(PairFromJson(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, "corpus line " +
                                              std::to_string(line_number) +
                                              ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError, "corpus line " +
                                              std::to_string(line_number) +
                                              ": " + e.what());
    }
  }
  return pairs;
}

std::vector<MRPair> ReadCorpusFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return ReadCorpus(in);
}

void WriteCorpusFile(const std::string& path,
                     const std::vector<MRPair>& pairs) {
  std::ostringstream out;
  for (const MRPair& pair : pairs) out << PairToJsonLine(pair);
  WriteFileOrThrow(path, out.str());
}

PhraseTableLoad ParsePhraseTable(std::istream& in) {
  PhraseTableLoad load;
  std::string raw;
  size_t line_number = 0;
  while (std::getline(in, raw)) {
    ++line_number;
    const std::string_view line = TrimLineEnd(raw);
    if (line.empty() || line.front() == '#' || IsBlank(line)) continue;
    const auto fail = [&](const std::string& what) {
      return Error(ErrorCode::kParseError, "phrase table line " +
                                               std::to_string(line_number) +
                                               ": " + what);
    };
    const size_t tab = line.find('\t');
    if (tab == std::string_view::npos ||
        line.find('\t', tab + 1) != std::string_view::npos) {
      throw fail("expected exactly 2 tab-separated columns");
    }
    const TokenSeq key_tokens = Tokenize(line.substr(0, tab));
    const TokenSeq value_tokens = Tokenize(line.substr(tab + 1));
    if (key_tokens.empty() || value_tokens.empty()) {
      throw fail("empty key or value");
    }
    std::string key = JoinTokens(key_tokens);
    std::string value = JoinTokens(value_tokens);
    auto& target = (key_tokens.size() == 1 && value_tokens.size() == 1)
                       ? load.table.word_map
                       : load.table.clause_map;
    auto [it, inserted] = target.insert_or_assign(std::move(key),
                                                  std::move(value));
    if (!inserted) ++load.duplicate_count;
  }
  return load;
}

PhraseTableLoad LoadPhraseTable(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return ParsePhraseTable(in);
}

void SwitchConfig::Validate() const {
  if (!(p_switch >= 0.0 && p_switch <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "p_switch must be in [0, 1]");
  }
}

SubstitutionResult SubstituteClause(const Clause& clause,
                                    const PhraseTable& table) {
  const TokenSeq& tokens = clause.tokens;
  size_t content_end = tokens.size();
  while (content_end > 0 && IsPunctuationToken(tokens[content_end - 1])) {
    --content_end;
  }
  TokenSeq content;
  for (size_t i = 0; i < content_end; ++i) {
    if (!IsPunctuationToken(tokens[i])) content.push_back(tokens[i]);
  }

  if (!content.empty()) {
    auto hit = table.clause_map.find(JoinTokens(content));
    if (hit != table.clause_map.end()) {
      std::string text = hit->second;
      for (size_t i = content_end; i < tokens.size(); ++i) {
        text += ' ';
        text += tokens[i];
      }
      return {std::move(text), true};
    }
  }

  TokenSeq replaced = tokens;
  bool changed = false;
  for (Token& token : replaced) {
    auto hit = table.word_map.find(token);
    if (hit != table.word_map.end() && hit->second != token) {
      token = hit->second;
      changed = true;
    }
  }
  return {JoinTokens(changed ? replaced : tokens), changed};
}

nlohmann::ordered_json SynthesisStats::ToJson() const {
  nlohmann::ordered_json j;
  j["input_pairs"] = input_pairs;
  j["output_records"] = output_records;
  j["clauses"] = clauses;
  j["switched_clauses"] = switched_clauses;
  j["switch_rate"] = switch_rate();
  return j;
}

MRPair SynthesizePair(const MRPair& pair, const PhraseTable& table,
                      const SwitchConfig& config, Rng& rng,
                      SynthesisStats* stats) {
  if (pair.lang != Lang::kEn) {
    throw Error(ErrorCode::kInvalidArgument,
                "synthesis input '" + pair.id + "' is not an English pair");
  }
  config.Validate();
  MRPair out = pair;
  out.id = pair.id + "-cs";
  out.lang = Lang::kCs;
  out.message = SwitchText(pair.message, table, config, rng, stats);
  out.reply = SwitchText(pair.reply, table, config, rng, stats);
  return out;
}

SynthesisStats SynthesizeCorpus(std::istream& in, std::ostream& out,
                                const PhraseTable& table,
                                const SwitchConfig& config) {
  config.Validate();
  SynthesisStats stats;
  Rng rng(config.rng_seed);
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (IsBlank(line)) continue;
    MRPair pair;
    try {
      pair = PairFromJson(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, "corpus line " +
                                              std::to_string(line_number) +
                                              ": " + e.what());
    }
    MRPair switched = SynthesizePair(pair, table, config, rng, &stats);
    out << PairToJsonLine(pair) << PairToJsonLine(switched);
    if (!out) throw Error(ErrorCode::kIoError, "write failed");
    ++stats.input_pairs;
    stats.output_records += 2;
  }
  if (in.bad()) throw Error(ErrorCode::kIoError, "read failed");
  return stats;
}

}  // namespace csreply
