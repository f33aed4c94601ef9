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

#ifndef CSREPLY_SERVICE_H_
#define CSREPLY_SERVICE_H_

#include <atomic>
#include <memory>
#include <string>
#include <string_view>

#include "csreply/encoder.h"
#include "csreply/ranker.h"
#include "csreply/responseset.h"
#include "csreply/textproc.h"

namespace csreply {

// Everything a request needs, loaded once and shared read-only.
struct Engine {
  EncoderParams params;
  Vocab vocab;
  ResponseSet responses;
  RankConfig rank;
  std::string model_id;  // fingerprint of the checkpoint

  static std::shared_ptr<const Engine> Load(const std::string& model_path,
                                            const std::string& responses_path,
                                            const RankConfig& rank);
};

struct ServiceOptions {
  // When set, files under this directory are served from "/".
  std::string static_dir;
};

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

// HTTP front end over the ranker:
//   POST /api/suggest   {"conversation":[{"sender","text"}], "n"?}
//   GET  /api/health    {"status","model_id","response_set_size"}
//   GET  /api/config    {"alpha","n1","n2","k_intents","dims",...}
// Requests are answered with 503 until an engine is installed.
class SuggestService {
 public:
  explicit SuggestService(ServiceOptions options = {});
  ~SuggestService();
  SuggestService(const SuggestService&) = delete;
  SuggestService& operator=(const SuggestService&) = delete;

  // May be called once, from any thread, while the server is running.
  void SetEngine(std::shared_ptr<const Engine> engine);
  bool loaded() const { return engine_.load(std::memory_order_acquire); }

  HttpReply HandleSuggest(std::string_view body) const;
  HttpReply HandleHealth() const;
  HttpReply HandleConfig() const;

  // Returns the bound port, or -1.
  int BindToAnyPort(const std::string& host);
  bool Bind(const std::string& host, int port);
  // Blocks until Stop().
  bool ListenAfterBind();
  void Stop();
  void WaitUntilReady() const;

 private:
  class Server;

  ServiceOptions options_;
  std::shared_ptr<const Engine> owned_engine_;
  std::atomic<const Engine*> engine_{nullptr};
  std::unique_ptr<Server> server_;
};

}  // namespace csreply

#endif  // CSREPLY_SERVICE_H_
