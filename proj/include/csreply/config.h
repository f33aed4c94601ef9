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

#ifndef CSREPLY_CONFIG_H_
#define CSREPLY_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "csreply/codeswitch.h"
#include "csreply/encoder.h"
#include "csreply/ranker.h"
#include "csreply/responseset.h"
#include "csreply/trainer.h"
#include "json.hpp"

namespace csreply {

// Every tunable of the pipeline as one flat key set. Files use `key = value`
// lines with '#' comments; unknown keys are rejected.
struct EngineConfig {
  // synthesis
  double p_switch = 0.3;
  std::vector<std::string> conjunctions = {"and", "but", "or", "because",
                                           "so"};
  uint64_t seed = 42;
  // encoder
  Dims dims;
  int vocab_min_count = 1;
  // trainer
  TrainConfig train;
  // response set
  int min_count = 1;
  int max_size = 2000;
  int k_intents = 8;
  IntentSource intent_source = IntentSource::kKMeans;
  // ranker
  RankConfig rank;
  // service
  std::string host = "127.0.0.1";
  int port = 8080;

  static EngineConfig Parse(std::string_view text);
  static EngineConfig LoadFile(const std::string& path);

  // Throws ConfigError for unknown keys or unparsable values.
  void Set(std::string_view key, std::string_view value);
  void Validate() const;

  // Canonical (key, value) list in a fixed key order.
  std::vector<std::pair<std::string, std::string>> Items() const;
  std::string Fingerprint() const;
  nlohmann::ordered_json ToJson() const;

  SwitchConfig switch_config() const;
  TrainConfig train_config() const;
  ResponseSetOptions response_set_options() const;
  SegmenterOptions segmenter() const;
};

}  // namespace csreply

#endif  // CSREPLY_CONFIG_H_
