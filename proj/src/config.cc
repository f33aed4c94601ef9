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

#include "csreply/config.h"

#include <charconv>
#include <functional>
#include <map>

#include "csreply/error.h"
#include "csreply/util.h"

namespace csreply {
namespace {

std::string_view Trim(std::string_view s) {
  const size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

Error BadValue(std::string_view key, std::string_view value) {
  return Error(ErrorCode::kConfigError, "invalid value '" + std::string(value) +
                                            "' for key '" + std::string(key) +
                                            "'");
}

double ParseDouble(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw BadValue(key, value);
  }
  return out;
}

template <typename Int>
Int ParseInt(std::string_view key, std::string_view value) {
  Int out = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw BadValue(key, value);
  }
  return out;
}

bool ParseBool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw BadValue(key, value);
}

std::string ShortDouble(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string JoinList(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ',';
    out += items[i];
  }
  return out;
}

struct Key {
  std::function<void(EngineConfig&, std::string_view)> set;
  std::function<std::string(const EngineConfig&)> get;
};

#define CSREPLY_DOUBLE_KEY(name, field)                                      \
  {                                                                          \
    name, {                                                                  \
      [](EngineConfig& c, std::string_view v) {                              \
        c.field = ParseDouble(name, v);                                      \
      },                                                                     \
          [](const EngineConfig& c) { return ShortDouble(c.field); }         \
    }                                                                        \
  }
#define CSREPLY_INT_KEY(name, field, type)                                   \
  {                                                                          \
    name, {                                                                  \
      [](EngineConfig& c, std::string_view v) {                              \
        c.field = ParseInt<type>(name, v);                                   \
      },                                                                     \
          [](const EngineConfig& c) { return std::to_string(c.field); }      \
    }                                                                        \
  }

// Fixed key order; Items() and the fingerprint follow it.
const std::vector<std::pair<std::string, Key>>& Keys() {
  static const std::vector<std::pair<std::string, Key>> kKeys = {
      CSREPLY_DOUBLE_KEY("p_switch", p_switch),
      {"conjunctions",
       {[](EngineConfig& c, std::string_view v) {
          c.conjunctions.clear();
          size_t start = 0;
          while (start <= v.size()) {
            const size_t comma = std::min(v.find(',', start), v.size());
            const std::string word =
                NormalizeText(Trim(v.substr(start, comma - start)));
            if (!word.empty()) c.conjunctions.push_back(word);
            start = comma + 1;
          }
        },
        [](const EngineConfig& c) { return JoinList(c.conjunctions); }}},
      CSREPLY_INT_KEY("seed", seed, uint64_t),
      CSREPLY_INT_KEY("d_emb", dims.d_emb, int),
      CSREPLY_INT_KEY("d_hid", dims.d_hid, int),
      CSREPLY_INT_KEY("d_out", dims.d_out, int),
      CSREPLY_INT_KEY("vocab_min_count", vocab_min_count, int),
      CSREPLY_DOUBLE_KEY("lr", train.lr),
      CSREPLY_DOUBLE_KEY("beta1", train.beta1),
      CSREPLY_DOUBLE_KEY("beta2", train.beta2),
      CSREPLY_DOUBLE_KEY("eps", train.eps),
      CSREPLY_INT_KEY("epochs", train.epochs, int),
      CSREPLY_INT_KEY("batch_size", train.batch_size, int),
      CSREPLY_DOUBLE_KEY("lambda_tr", train.lambda_tr),
      {"shuffle",
       {[](EngineConfig& c, std::string_view v) {
          c.train.shuffle = ParseBool("shuffle", v);
        },
        [](const EngineConfig& c) {
          return std::string(c.train.shuffle ? "true" : "false");
        }}},
      CSREPLY_INT_KEY("min_count", min_count, int),
      CSREPLY_INT_KEY("max_size", max_size, int),
      CSREPLY_INT_KEY("k_intents", k_intents, int),
      {"intent_source",
       {[](EngineConfig& c, std::string_view v) {
          if (v == "kmeans") {
            c.intent_source = IntentSource::kKMeans;
          } else if (v == "sentiment") {
            c.intent_source = IntentSource::kSentiment;
          } else {
            throw BadValue("intent_source", v);
          }
        },
        [](const EngineConfig& c) {
          return std::string(c.intent_source == IntentSource::kKMeans
                                 ? "kmeans"
                                 : "sentiment");
        }}},
      CSREPLY_DOUBLE_KEY("alpha", rank.alpha),
      CSREPLY_INT_KEY("n1", rank.n1, int),
      CSREPLY_INT_KEY("n2", rank.n2, int),
      CSREPLY_DOUBLE_KEY("jaccard_threshold", rank.jaccard_threshold),
      {"host",
       {[](EngineConfig& c, std::string_view v) { c.host = std::string(v); },
        [](const EngineConfig& c) { return c.host; }}},
      CSREPLY_INT_KEY("port", port, int),
  };
  return kKeys;
}

#undef CSREPLY_DOUBLE_KEY
#undef CSREPLY_INT_KEY

}  // namespace

EngineConfig EngineConfig::Parse(std::string_view text) {
  EngineConfig config;
  size_t line_number = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t newline = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, newline - pos);
    pos = newline + 1;
    ++line_number;
    const size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfigError,
                  "line " + std::to_string(line_number) + ": expected key = value");
    }
    config.Set(Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
  config.Validate();
  return config;
}

EngineConfig EngineConfig::LoadFile(const std::string& path) {
  return Parse(ReadFileOrThrow(path));
}

void EngineConfig::Set(std::string_view key, std::string_view value) {
  for (const auto& [name, k] : Keys()) {
    if (name == key) {
      k.set(*this, Trim(value));
      return;
    }
  }
  throw Error(ErrorCode::kConfigError, "unknown key '" + std::string(key) + "'");
}

void EngineConfig::Validate() const {
  try {
    switch_config().Validate();
    train_config().Validate();
    response_set_options().Validate();
    rank.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
  if (dims.d_emb < 1 || dims.d_hid < 1 || dims.d_out < 1) {
    throw Error(ErrorCode::kConfigError, "dims must be >= 1");
  }
  if (vocab_min_count < 1) {
    throw Error(ErrorCode::kConfigError, "vocab_min_count must be >= 1");
  }
  if (port < 0 || port > 65535) {
    throw Error(ErrorCode::kConfigError, "port out of range");
  }
}

std::vector<std::pair<std::string, std::string>> EngineConfig::Items() const {
  std::vector<std::pair<std::string, std::string>> items;
  for (const auto& [name, k] : Keys()) items.emplace_back(name, k.get(*this));
  return items;
}

std::string EngineConfig::Fingerprint() const {
  std::string canonical;
  for (const auto& [key, value] : Items()) {
    canonical += key + "=" + value + "\n";
  }
  return csreply::Fingerprint(canonical);
}

nlohmann::ordered_json EngineConfig::ToJson() const {
  nlohmann::ordered_json j;
  for (const auto& [key, value] : Items()) j[key] = value;
  return j;
}

SwitchConfig EngineConfig::switch_config() const {
  SwitchConfig c;
  c.p_switch = p_switch;
  c.rng_seed = seed;
  c.segmenter = segmenter();
  return c;
}

TrainConfig EngineConfig::train_config() const {
  TrainConfig c = train;
  c.seed = seed;
  return c;
}

ResponseSetOptions EngineConfig::response_set_options() const {
  ResponseSetOptions o;
  o.min_count = min_count;
  o.max_size = max_size;
  o.k_intents = k_intents;
  o.seed = seed;
  o.intent_source = intent_source;
  return o;
}

SegmenterOptions EngineConfig::segmenter() const {
  SegmenterOptions s;
  s.conjunctions = conjunctions;
  return s;
}

}  // namespace csreply
