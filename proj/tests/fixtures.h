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

#ifndef CSREPLY_TESTS_FIXTURES_H_
#define CSREPLY_TESTS_FIXTURES_H_

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "csreply/codeswitch.h"
#include "csreply/util.h"

namespace csreply::testing {

struct SeparableCorpus {
  std::vector<MRPair> train;
  std::vector<MRPair> heldout;
  size_t n_replies = 0;
};

// Reply class c owns the token "key<c>", which appears in its reply and in
// every message answered by it. Other message words are random fillers, so a
// held-out message is only recognisable through its key token.
inline SeparableCorpus MakeSeparableCorpus(size_t n_replies,
                                           size_t pairs_per_reply,
                                           uint64_t seed) {
  Rng rng(seed);
  const auto filler = [&](const char* prefix, size_t pool) {
    return std::string(prefix) + std::to_string(rng.NextBelow(pool));
  };
  const auto message_for = [&](size_t c) {
    std::vector<std::string> words = {"key" + std::to_string(c)};
    for (int k = 0; k < 3; ++k) words.push_back(filler("w", 200));
    // Key token at a random position.
    std::swap(words[0], words[rng.NextBelow(words.size())]);
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    return text;
  };

  SeparableCorpus corpus;
  corpus.n_replies = n_replies;
  std::vector<std::string> replies;
  for (size_t c = 0; c < n_replies; ++c) {
    replies.push_back("key" + std::to_string(c) + " " + filler("r", 50) + " " +
                      filler("r", 50));
  }
  for (size_t k = 0; k < pairs_per_reply; ++k) {
    for (size_t c = 0; c < n_replies; ++c) {
      MRPair p;
      p.id = "train-" + std::to_string(c) + "-" + std::to_string(k);
      p.message = message_for(c);
      p.reply = replies[c];
      corpus.train.push_back(std::move(p));
    }
  }
  for (size_t c = 0; c < n_replies; ++c) {
    MRPair p;
    p.id = "heldout-" + std::to_string(c);
    p.message = message_for(c);
    p.reply = replies[c];
    corpus.heldout.push_back(std::move(p));
  }
  return corpus;
}

inline std::filesystem::path TempDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("csreply-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace csreply::testing

#endif  // CSREPLY_TESTS_FIXTURES_H_
