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

#include "csreply/service.h"

#include <chrono>

#include "csreply/error.h"
#include "csreply/util.h"
#include "httplib.h"
#include "json.hpp"

namespace csreply {
namespace {

using nlohmann::ordered_json;

HttpReply JsonReply(int status, const ordered_json& body) {
  return {status, body.dump()};
}

HttpReply ErrorReply(int status, const std::string& message) {
  ordered_json body;
  body["error"] = message;
  return JsonReply(status, body);
}

bool IsLocalOrigin(const std::string& origin) {
  for (const char* prefix :
       {"http://localhost", "http://127.0.0.1", "http://[::1]"}) {
    const std::string p(prefix);
    if (origin.compare(0, p.size(), p) == 0 &&
        (origin.size() == p.size() || origin[p.size()] == ':')) {
      return true;
    }
  }
  return false;
}

}  // namespace

class SuggestService::Server {
 public:
  httplib::Server http;
};

std::shared_ptr<const Engine> Engine::Load(const std::string& model_path,
                                           const std::string& responses_path,
                                           const RankConfig& rank) {
  rank.Validate();
  auto engine = std::make_shared<Engine>();
  const std::string checkpoint_text = ReadFileOrThrow(model_path);
  Checkpoint ckpt = ParseCheckpoint(checkpoint_text);
  engine->params = std::move(ckpt.params);
  engine->vocab = std::move(ckpt.vocab);
  engine->responses = LoadResponseSet(responses_path, &engine->vocab);
  if (engine->responses.entries.front().vector.size() !=
      static_cast<size_t>(engine->params.dims.d_out)) {
    throw Error(ErrorCode::kIntegrityError,
                "response vectors do not match encoder output size");
  }
  engine->rank = rank;
  engine->model_id = Fingerprint(checkpoint_text);
  return engine;
}

SuggestService::SuggestService(ServiceOptions options)
    : options_(std::move(options)), server_(std::make_unique<Server>()) {
  httplib::Server& http = server_->http;
  const auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  };
  http.Post("/api/suggest",
            [this, send](const httplib::Request& req, httplib::Response& res) {
              send(res, HandleSuggest(req.body));
            });
  http.Get("/api/health",
           [this, send](const httplib::Request&, httplib::Response& res) {
             send(res, HandleHealth());
           });
  http.Get("/api/config",
           [this, send](const httplib::Request&, httplib::Response& res) {
             send(res, HandleConfig());
           });
  http.Options(R"(/api/.*)",
               [](const httplib::Request&, httplib::Response& res) {
                 res.status = 204;
               });
  http.set_post_routing_handler(
      [](const httplib::Request& req, httplib::Response& res) {
        const std::string origin = req.get_header_value("Origin");
        if (IsLocalOrigin(origin)) {
          res.set_header("Access-Control-Allow-Origin", origin);
          res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
          res.set_header("Access-Control-Allow-Headers", "Content-Type");
          res.set_header("Vary", "Origin");
        }
      });
  if (!options_.static_dir.empty()) {
    http.set_mount_point("/", options_.static_dir);
  }
}

SuggestService::~SuggestService() { Stop(); }

void SuggestService::SetEngine(std::shared_ptr<const Engine> engine) {
  if (!engine) throw Error(ErrorCode::kInvalidArgument, "null engine");
  if (owned_engine_) {
    throw Error(ErrorCode::kInvalidArgument, "engine already installed");
  }
  owned_engine_ = std::move(engine);
  engine_.store(owned_engine_.get(), std::memory_order_release);
}

HttpReply SuggestService::HandleSuggest(std::string_view body) const {
  const auto start = std::chrono::steady_clock::now();
  const Engine* engine = engine_.load(std::memory_order_acquire);
  if (engine == nullptr) return ErrorReply(503, "model not loaded");

  nlohmann::json request;
  try {
    request = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    return ErrorReply(400, "body is not valid JSON");
  }
  if (!request.is_object()) return ErrorReply(400, "body must be an object");
  auto conv = request.find("conversation");
  if (conv == request.end() || !conv->is_array()) {
    return ErrorReply(400, "'conversation' must be an array");
  }
  if (conv->empty()) return ErrorReply(400, "conversation is empty");
  for (const auto& turn : *conv) {
    if (!turn.is_object() || !turn.contains("sender") ||
        !turn.contains("text") || !turn["sender"].is_string() ||
        !turn["text"].is_string()) {
      return ErrorReply(400, "each turn needs string 'sender' and 'text'");
    }
    const std::string sender = turn["sender"].get<std::string>();
    if (sender != "me" && sender != "other") {
      return ErrorReply(400, "sender must be 'me' or 'other'");
    }
  }
  const auto& last = conv->back();
  if (last["sender"] != "other") {
    return ErrorReply(400, "last turn must come from 'other'");
  }

  RankConfig rank = engine->rank;
  if (auto n = request.find("n"); n != request.end() && !n->is_null()) {
    if (!n->is_number_integer() || n->get<int64_t>() < 1 ||
        n->get<int64_t>() > rank.n2) {
      return ErrorReply(400, "'n' must be an integer in [1, " +
                                 std::to_string(rank.n2) + "]");
    }
    rank.n2 = n->get<int>();
  }

  std::vector<Suggestion> suggestions;
  try {
    suggestions = Suggest(last["text"].get<std::string>(), engine->params,
                          engine->vocab, engine->responses, rank);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kEmptyInput) return ErrorReply(400, e.what());
    return ErrorReply(500, e.what());
  }

  ordered_json out;
  out["suggestions"] = ordered_json::array();
  for (const Suggestion& s : suggestions) {
    ordered_json item;
    item["text"] = s.text;
    item["score"] = s.score;
    item["intent_id"] = s.intent_id;
    out["suggestions"].push_back(std::move(item));
  }
  out["model_id"] = engine->model_id;
  out["elapsed_ms"] = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return JsonReply(200, out);
}

HttpReply SuggestService::HandleHealth() const {
  const Engine* engine = engine_.load(std::memory_order_acquire);
  ordered_json out;
  if (engine == nullptr) {
    out["status"] = "loading";
    out["model_id"] = "";
    out["response_set_size"] = 0;
    return JsonReply(503, out);
  }
  out["status"] = "ok";
  out["model_id"] = engine->model_id;
  out["response_set_size"] = engine->responses.size();
  return JsonReply(200, out);
}

HttpReply SuggestService::HandleConfig() const {
  const Engine* engine = engine_.load(std::memory_order_acquire);
  if (engine == nullptr) return ErrorReply(503, "model not loaded");
  ordered_json out;
  out["alpha"] = engine->rank.alpha;
  out["n1"] = engine->rank.n1;
  out["n2"] = engine->rank.n2;
  out["jaccard_threshold"] = engine->rank.jaccard_threshold;
  out["k_intents"] = engine->responses.k_intents;
  out["dims"] = {{"d_emb", engine->params.dims.d_emb},
                 {"d_hid", engine->params.dims.d_hid},
                 {"d_out", engine->params.dims.d_out}};
  return JsonReply(200, out);
}

int SuggestService::BindToAnyPort(const std::string& host) {
  return server_->http.bind_to_any_port(host);
}

bool SuggestService::Bind(const std::string& host, int port) {
  return server_->http.bind_to_port(host, port);
}

bool SuggestService::ListenAfterBind() {
  return server_->http.listen_after_bind();
}

void SuggestService::Stop() {
  if (server_ && server_->http.is_running()) server_->http.stop();
}

void SuggestService::WaitUntilReady() const { server_->http.wait_until_ready(); }

}  // namespace csreply
