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

#include "csreply/responseset.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "csreply/error.h"
#include "csreply/util.h"

namespace csreply {
namespace {

constexpr int kResponseSetVersion = 1;
constexpr int kMaxKMeansIterations = 100;

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

std::vector<double> ToUnit(std::vector<double> v) {
  double norm_sq = 0.0;
  for (double x : v) norm_sq += x * x;
  const double norm = std::sqrt(norm_sq);
  if (norm < 1e-12) return {};
  for (double& x : v) x /= norm;
  return v;
}

std::string Lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::vector<double>> SeedCenters(
    std::span<const Embedding> points, int k, Rng& rng) {
  const size_t n = points.size();
  std::vector<std::vector<double>> centers;
  centers.push_back(points[rng.NextBelow(n)].values);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (centers.size() < static_cast<size_t>(k)) {
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i],
                            SquaredDistance(points[i].values, centers.back()));
      total += nearest[i];
    }
    size_t pick = n - 1;
    if (total > 0.0) {
      const double target = rng.NextDouble() * total;
      double cumulative = 0.0;
      for (size_t i = 0; i < n; ++i) {
        cumulative += nearest[i];
        if (cumulative > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.NextBelow(n);
    }
    centers.push_back(points[pick].values);
  }
  return centers;
}

}  // namespace

std::optional<size_t> ResponseSet::Find(std::string_view text) const {
  const std::string key = NormalizeText(text);
  for (size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].text == key) return i;
  }
  return std::nullopt;
}

void ResponseSetOptions::Validate() const {
  if (min_count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "min_count must be >= 1");
  }
  if (k_intents < 1 || max_size < k_intents) {
    throw Error(ErrorCode::kInvalidArgument,
                "need max_size >= k_intents >= 1");
  }
}

const std::vector<std::string>& SentimentLabels() {
  static const std::vector<std::string> kLabels = {
      "Angry", "Curious to Dive Deeper", "Disguised", "Fearful",
      "Happy", "Sad",                    "Surprised"};
  return kLabels;
}

std::optional<int> SentimentIntent(std::string_view label) {
  const std::string key = Lowercase(label);
  if (key == "disgusted") return 2;
  const auto& labels = SentimentLabels();
  for (size_t i = 0; i < labels.size(); ++i) {
    if (Lowercase(labels[i]) == key) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::string CorpusFingerprint(std::span<const MRPair> corpus) {
  uint64_t hash = Fnv1a64("");
  for (const MRPair& pair : corpus) {
    hash = Fnv1a64(PairToJsonLine(pair), hash);
  }
  return HexDigest(hash);
}

ResponseSet BuildResponseSet(std::span<const MRPair> corpus,
                             const EncoderParams& params, const Vocab& vocab,
                             const ResponseSetOptions& options) {
  options.Validate();
  struct Tally {
    int64_t count = 0;
    std::map<int, int64_t> sentiment_votes;
  };
  std::map<std::string, Tally> tallies;
  for (const MRPair& pair : corpus) {
    std::string text = NormalizeText(pair.reply);
    if (text.empty()) continue;
    Tally& tally = tallies[text];
    ++tally.count;
    if (pair.sentiment) {
      if (auto intent = SentimentIntent(*pair.sentiment)) {
        ++tally.sentiment_votes[*intent];
      }
    }
  }

  std::vector<std::pair<std::string, const Tally*>> kept;
  for (const auto& [text, tally] : tallies) {
    if (tally.count >= options.min_count) kept.emplace_back(text, &tally);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second->count != b.second->count) {
      return a.second->count > b.second->count;
    }
    return a.first < b.first;
  });
  if (kept.size() > static_cast<size_t>(options.max_size)) {
    kept.resize(static_cast<size_t>(options.max_size));
  }
  if (kept.empty()) {
    throw Error(ErrorCode::kEmptyResponseSet,
                "no reply reaches min_count " +
                    std::to_string(options.min_count));
  }

  int64_t total = 0;
  for (const auto& item : kept) total += item.second->count;

  ResponseSet set;
  set.built_from = CorpusFingerprint(corpus);
  for (const auto& [text, tally] : kept) {
    ResponseEntry entry;
    entry.text = text;
    entry.token_ids = EncodeIds(Tokenize(text), vocab);
    entry.vector = Encode(params, entry.token_ids, Side::kReply);
    entry.count = tally->count;
    entry.lm_score = std::log(static_cast<double>(tally->count) /
                              static_cast<double>(total));
    set.entries.push_back(std::move(entry));
  }

  if (options.intent_source == IntentSource::kSentiment) {
    set.k_intents = static_cast<int>(SentimentLabels().size());
    for (size_t i = 0; i < kept.size(); ++i) {
      const auto& votes = kept[i].second->sentiment_votes;
      if (votes.empty()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "reply '" + kept[i].first + "' has no sentiment label");
      }
      // Majority label; std::map order breaks ties toward the lower id.
      int best = votes.begin()->first;
      for (const auto& [intent, n] : votes) {
        if (n > votes.at(best)) best = intent;
      }
      set.entries[i].intent_id = best;
    }
  } else {
    set.k_intents =
        std::min(options.k_intents, static_cast<int>(set.entries.size()));
    std::vector<Embedding> vectors;
    vectors.reserve(set.entries.size());
    for (const auto& e : set.entries) vectors.push_back(e.vector);
    const KMeansResult km = AssignIntents(vectors, set.k_intents, options.seed);
    for (size_t i = 0; i < km.assignment.size(); ++i) {
      set.entries[i].intent_id = km.assignment[i];
    }
  }
  return set;
}

KMeansResult AssignIntents(std::span<const Embedding> vectors, int k,
                           uint64_t seed) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (vectors.size() < static_cast<size_t>(k)) {
    throw Error(ErrorCode::kTooFewPoints,
                std::to_string(vectors.size()) + " points for k=" +
                    std::to_string(k));
  }
  const size_t n = vectors.size();
  const size_t dim = vectors.front().size();
  Rng rng(seed);
  std::vector<std::vector<double>> centers = SeedCenters(vectors, k, rng);

  KMeansResult result;
  result.assignment.assign(n, -1);
  std::vector<double> distance(n, 0.0);
  for (int iter = 1; iter <= kMaxKMeansIterations; ++iter) {
    bool changed = false;
    double objective = 0.0;
    for (size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = SquaredDistance(vectors[i].values, centers[0]);
      for (int c = 1; c < k; ++c) {
        const double d = SquaredDistance(vectors[i].values, centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      changed = changed || result.assignment[i] != best;
      result.assignment[i] = best;
      distance[i] = best_d;
      objective += best_d;
    }
    result.objective_history.push_back(objective);
    result.iterations = iter;
    if (!changed) break;

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<size_t> sizes(k, 0);
    for (size_t i = 0; i < n; ++i) {
      const int c = result.assignment[i];
      ++sizes[c];
      for (size_t d = 0; d < dim; ++d) sums[c][d] += vectors[i].values[d];
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[c] == 0) {
        const size_t far = static_cast<size_t>(
            std::max_element(distance.begin(), distance.end()) -
            distance.begin());
        centers[c] = vectors[far].values;
        distance[far] = 0.0;
        continue;
      }
      std::vector<double> unit = ToUnit(std::move(sums[c]));
      // A zero mean leaves every unit center equally good; keep the old one.
      if (!unit.empty()) centers[c] = std::move(unit);
    }
  }
  return result;
}

std::string SerializeResponseSet(const ResponseSet& set,
                                 const nlohmann::ordered_json& meta) {
  nlohmann::ordered_json j;
  j["version"] = kResponseSetVersion;
  j["k_intents"] = set.k_intents;
  j["built_from"] = set.built_from;
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const ResponseEntry& e : set.entries) {
    nlohmann::ordered_json item;
    item["text"] = e.text;
    item["count"] = e.count;
    item["lm_score"] = e.lm_score;
    item["intent_id"] = e.intent_id;
    item["vector"] = e.vector.values;
    entries.push_back(std::move(item));
  }
  j["entries"] = std::move(entries);
  if (!meta.empty()) j["meta"] = meta;
  return j.dump() + "\n";
}

ResponseSet ParseResponseSet(std::string_view text, const Vocab* vocab) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError,
                std::string("response set: ") + e.what());
  }
  const auto integrity = [](const std::string& field) {
    return Error(ErrorCode::kIntegrityError, field);
  };
  try {
    if (!j.is_object() || !j.contains("version")) throw integrity("version");
    if (j["version"] != kResponseSetVersion) throw integrity("version");
    ResponseSet set;
    set.k_intents = j.at("k_intents").get<int>();
    if (set.k_intents < 1) throw integrity("k_intents");
    set.built_from = j.at("built_from").get<std::string>();
    const auto& entries = j.at("entries");
    if (!entries.is_array() || entries.empty()) throw integrity("entries");

    std::set<std::string> seen;
    int64_t total = 0;
    size_t dim = 0;
    for (const auto& item : entries) {
      ResponseEntry e;
      e.text = item.at("text").get<std::string>();
      if (e.text.empty() || NormalizeText(e.text) != e.text ||
          !seen.insert(e.text).second) {
        throw integrity("text");
      }
      e.count = item.at("count").get<int64_t>();
      if (e.count < 1) throw integrity("count");
      total += e.count;
      e.lm_score = item.at("lm_score").get<double>();
      e.intent_id = item.at("intent_id").get<int>();
      if (e.intent_id < 0 || e.intent_id >= set.k_intents) {
        throw integrity("intent_id");
      }
      e.vector.values = item.at("vector").get<std::vector<double>>();
      if (dim == 0) dim = e.vector.size();
      if (dim == 0 || e.vector.size() != dim) throw integrity("vector");
      const double norm = std::sqrt(Dot(e.vector.values, e.vector.values));
      if (!(std::abs(norm - 1.0) <= 1e-6)) throw integrity("vector");
      if (vocab != nullptr) e.token_ids = EncodeIds(Tokenize(e.text), *vocab);
      set.entries.push_back(std::move(e));
    }
    for (const ResponseEntry& e : set.entries) {
      const double expected = std::log(static_cast<double>(e.count) /
                                       static_cast<double>(total));
      if (!(std::abs(e.lm_score - expected) <= 1e-9)) {
        throw integrity("lm_score");
      }
    }
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIntegrityError,
                std::string("response set: ") + e.what());
  }
}

void SaveResponseSet(const std::string& path, const ResponseSet& set,
                     const nlohmann::ordered_json& meta) {
  WriteFileOrThrow(path, SerializeResponseSet(set, meta));
}

ResponseSet LoadResponseSet(const std::string& path, const Vocab* vocab) {
  return ParseResponseSet(ReadFileOrThrow(path), vocab);
}

}  // namespace csreply
