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

#include "csreply/ranker.h"

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>

#include "csreply/error.h"

namespace csreply {
namespace {

std::set<std::string> TokenSet(std::string_view text) {
  const TokenSeq tokens = Tokenize(text);
  return {tokens.begin(), tokens.end()};
}

double SetJaccard(const std::set<std::string>& a,
                  const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  size_t common = 0;
  for (const auto& t : a) common += b.count(t);
  return static_cast<double>(common) /
         static_cast<double>(a.size() + b.size() - common);
}

}  // namespace

void RankConfig::Validate() const {
  if (n2 < 1 || n1 < n2) {
    throw Error(ErrorCode::kInvalidArgument, "need n1 >= n2 >= 1");
  }
  if (!(alpha >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be >= 0");
  }
  if (!(jaccard_threshold >= 0.0 && jaccard_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "jaccard_threshold must be in [0, 1]");
  }
}

std::vector<double> ScoreAll(const Embedding& message, const ResponseSet& set,
                             double alpha) {
  std::vector<double> scores(set.entries.size());
  for (size_t k = 0; k < set.entries.size(); ++k) {
    const ResponseEntry& e = set.entries[k];
    scores[k] = Dot(message.values, e.vector.values) + alpha * e.lm_score;
  }
  return scores;
}

std::vector<size_t> TopN1(std::span<const double> scores, int n1) {
  if (n1 < 1) throw Error(ErrorCode::kInvalidArgument, "n1 must be >= 1");
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const size_t keep = std::min(order.size(), static_cast<size_t>(n1));
  const auto better = [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + keep, order.end(), better);
  order.resize(keep);
  return order;
}

double TokenSetJaccard(std::string_view a, std::string_view b) {
  return SetJaccard(TokenSet(a), TokenSet(b));
}

std::vector<size_t> LexicalDedup(std::span<const size_t> candidates,
                                 const ResponseSet& set, double threshold) {
  std::vector<size_t> representatives;
  std::vector<std::set<std::string>> rep_tokens;
  for (size_t index : candidates) {
    std::set<std::string> tokens = TokenSet(set.entries.at(index).text);
    bool merged = false;
    for (const auto& rep : rep_tokens) {
      if (SetJaccard(tokens, rep) >= threshold) {
        merged = true;
        break;
      }
    }
    if (!merged) {
      representatives.push_back(index);
      rep_tokens.push_back(std::move(tokens));
    }
  }
  return representatives;
}

std::vector<size_t> Diversify(std::span<const size_t> representatives,
                              const ResponseSet& set, int n2) {
  std::vector<size_t> picks;
  std::vector<bool> used(representatives.size(), false);
  const auto intent = [&](size_t pos) {
    return set.entries.at(representatives[pos]).intent_id;
  };
  const size_t want =
      std::min(representatives.size(), static_cast<size_t>(std::max(n2, 0)));
  while (picks.size() < want) {
    std::optional<size_t> choice;
    const bool single_intent_so_far =
        !picks.empty() &&
        std::all_of(picks.begin(), picks.end(), [&](size_t index) {
          return set.entries.at(index).intent_id ==
                 set.entries.at(picks.front()).intent_id;
        });
    if (single_intent_so_far) {
      const int first_intent = set.entries.at(picks.front()).intent_id;
      for (size_t pos = 0; pos < representatives.size(); ++pos) {
        if (!used[pos] && intent(pos) != first_intent) {
          choice = pos;
          break;
        }
      }
    }
    if (!choice) {
      for (size_t pos = 0; pos < representatives.size(); ++pos) {
        if (!used[pos]) {
          choice = pos;
          break;
        }
      }
    }
    used[*choice] = true;
    picks.push_back(representatives[*choice]);
  }
  return picks;
}

std::vector<Suggestion> Suggest(std::string_view message,
                                const EncoderParams& params, const Vocab& vocab,
                                const ResponseSet& set,
                                const RankConfig& config) {
  config.Validate();
  const TokenSeq tokens = Tokenize(message);
  if (tokens.empty()) {
    throw Error(ErrorCode::kEmptyInput, "message has no tokens");
  }
  const Embedding embedding =
      Encode(params, EncodeIds(tokens, vocab), Side::kMessage);
  const std::vector<double> scores = ScoreAll(embedding, set, config.alpha);
  const std::vector<size_t> candidates = TopN1(scores, config.n1);
  const std::vector<size_t> reps =
      LexicalDedup(candidates, set, config.jaccard_threshold);
  std::vector<size_t> picks = Diversify(reps, set, config.n2);

  std::sort(picks.begin(), picks.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  std::vector<Suggestion> out;
  out.reserve(picks.size());
  for (size_t index : picks) {
    const ResponseEntry& e = set.entries[index];
    out.push_back({e.text, scores[index], e.intent_id, index});
  }
  return out;
}

}  // namespace csreply
