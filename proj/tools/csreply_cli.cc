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

// Command-line entry point: synthesize -> train -> build-responses -> eval,
// plus suggest and serve. Exit codes: 0 success, 1 domain/input error,
// 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "csreply/codeswitch.h"
#include "csreply/config.h"
#include "csreply/encoder.h"
#include "csreply/error.h"
#include "csreply/eval.h"
#include "csreply/ranker.h"
#include "csreply/responseset.h"
#include "csreply/service.h"
#include "csreply/trainer.h"
#include "csreply/util.h"
#include "json.hpp"

namespace {

using csreply::EngineConfig;
using nlohmann::ordered_json;

constexpr int kArtifactVersion = 1;

// Flags that override config keys; only flags actually given are applied.
struct Overrides {
  std::string config_path;
  std::map<std::string, std::string> values;

  void Bind(CLI::App* cmd, const std::string& flag, const std::string& key,
            const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }

  EngineConfig Resolve() const {
    EngineConfig config = config_path.empty()
                              ? EngineConfig()
                              : EngineConfig::LoadFile(config_path);
    for (const auto& [key, value] : values) config.Set(key, value);
    config.Validate();
    return config;
  }
};

ordered_json ArtifactMeta(const EngineConfig& config,
                          const std::vector<std::string>& inputs) {
  ordered_json meta;
  meta["version"] = kArtifactVersion;
  meta["config_fingerprint"] = config.Fingerprint();
  meta["config"] = config.ToJson();
  ordered_json fingerprints = ordered_json::object();
  for (const std::string& path : inputs) {
    fingerprints[path] = csreply::Fingerprint(csreply::ReadFileOrThrow(path));
  }
  meta["inputs"] = fingerprints;
  return meta;
}

void WriteSidecar(const std::string& path, const ordered_json& meta) {
  csreply::WriteFileOrThrow(path + ".meta.json", meta.dump(2) + "\n");
}

std::vector<csreply::TokenSeq> VocabCorpus(
    const std::vector<csreply::MRPair>& pairs) {
  std::vector<csreply::TokenSeq> corpus;
  for (const auto& p : pairs) {
    corpus.push_back(csreply::Tokenize(p.message));
    corpus.push_back(csreply::Tokenize(p.reply));
    if (p.message_translation) {
      corpus.push_back(csreply::Tokenize(*p.message_translation));
    }
    if (p.reply_translation) {
      corpus.push_back(csreply::Tokenize(*p.reply_translation));
    }
  }
  return corpus;
}

int RunSynthesize(const Overrides& o, const std::string& in_path,
                  const std::string& table_path, const std::string& out_path) {
  const EngineConfig config = o.Resolve();
  const csreply::PhraseTableLoad table = csreply::LoadPhraseTable(table_path);
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw csreply::Error(csreply::ErrorCode::kIoError,
                                "cannot open " + in_path);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw csreply::Error(csreply::ErrorCode::kIoError,
                                 "cannot open " + out_path);
  const csreply::SynthesisStats stats = csreply::SynthesizeCorpus(
      in, out, table.table, config.switch_config());
  out.close();
  if (!out) throw csreply::Error(csreply::ErrorCode::kIoError,
                                 "cannot write " + out_path);

  ordered_json report = stats.ToJson();
  report["phrase_table_duplicates"] = table.duplicate_count;
  ordered_json meta = ArtifactMeta(config, {in_path, table_path});
  meta["stats"] = report;
  WriteSidecar(out_path, meta);
  std::cout << report.dump() << "\n";
  return 0;
}

int RunTrain(const Overrides& o, const std::string& corpus_path,
             const std::string& out_path, std::string loss_log_path) {
  const EngineConfig config = o.Resolve();
  const auto corpus = csreply::ReadCorpusFile(corpus_path);
  if (corpus.empty()) {
    throw csreply::Error(csreply::ErrorCode::kEmptyCorpus, corpus_path);
  }
  const csreply::Vocab vocab =
      csreply::Vocab::Build(VocabCorpus(corpus), config.vocab_min_count);
  const csreply::TrainResult result =
      csreply::Train(corpus, vocab, config.train_config(), config.dims);

  csreply::Checkpoint ckpt;
  ckpt.params = result.params;
  ckpt.vocab = vocab;
  ckpt.meta = ArtifactMeta(config, {corpus_path});
  csreply::SaveCheckpoint(out_path, ckpt);

  if (loss_log_path.empty()) loss_log_path = out_path + ".loss.csv";
  csreply::WriteFileOrThrow(loss_log_path, csreply::LossLogCsv(result.log));
  WriteSidecar(loss_log_path, ckpt.meta);

  ordered_json summary;
  summary["checkpoint"] = out_path;
  summary["loss_log"] = loss_log_path;
  summary["vocab_size"] = vocab.size();
  summary["epochs"] = result.log.size();
  if (!result.log.empty()) summary["final_total_loss"] = result.log.back().total;
  std::cout << summary.dump() << "\n";
  return 0;
}

int RunBuildResponses(const Overrides& o, const std::string& corpus_path,
                      const std::string& model_path,
                      const std::string& out_path) {
  const EngineConfig config = o.Resolve();
  const auto corpus = csreply::ReadCorpusFile(corpus_path);
  const csreply::Checkpoint ckpt = csreply::LoadCheckpoint(model_path);
  const csreply::ResponseSet set = csreply::BuildResponseSet(
      corpus, ckpt.params, ckpt.vocab, config.response_set_options());
  csreply::SaveResponseSet(out_path, set,
                           ArtifactMeta(config, {corpus_path, model_path}));
  ordered_json summary;
  summary["entries"] = set.size();
  summary["k_intents"] = set.k_intents;
  summary["built_from"] = set.built_from;
  std::cout << summary.dump() << "\n";
  return 0;
}

int RunEval(const Overrides& o, const std::string& corpus_path,
            const std::string& model_path, const std::string& responses_path,
            const std::string& out_path, std::string csv_path,
            const std::string& model_name) {
  const EngineConfig config = o.Resolve();
  const auto corpus = csreply::ReadCorpusFile(corpus_path);
  const csreply::Checkpoint ckpt = csreply::LoadCheckpoint(model_path);
  const csreply::ResponseSet set =
      csreply::LoadResponseSet(responses_path, &ckpt.vocab);
  csreply::EvalOptions options;
  options.model_name = model_name;
  options.alpha = config.rank.alpha;
  const csreply::EvalReport report =
      csreply::RunEval(corpus, ckpt.params, ckpt.vocab, set, options);

  ordered_json j = csreply::ReportToJson(report);
  j["meta"] = ArtifactMeta(config, {corpus_path, model_path, responses_path});
  csreply::WriteFileOrThrow(out_path, j.dump(2) + "\n");
  if (csv_path.empty()) {
    csv_path = out_path;
    if (csv_path.size() > 5 &&
        csv_path.compare(csv_path.size() - 5, 5, ".json") == 0) {
      csv_path.resize(csv_path.size() - 5);
    }
    csv_path += ".csv";
  }
  csreply::WriteFileOrThrow(csv_path, csreply::ReportCsv(report));
  std::cout << csreply::ReportToJson(report).dump() << "\n";
  return 0;
}

int RunSuggest(const Overrides& o, const std::string& model_path,
               const std::string& responses_path, const std::string& message,
               std::optional<int> n) {
  EngineConfig config = o.Resolve();
  if (n) config.rank.n2 = *n;
  const auto engine =
      csreply::Engine::Load(model_path, responses_path, config.rank);
  const auto suggestions =
      csreply::Suggest(message, engine->params, engine->vocab,
                       engine->responses, engine->rank);
  ordered_json out;
  out["suggestions"] = ordered_json::array();
  for (const auto& s : suggestions) {
    ordered_json item;
    item["text"] = s.text;
    item["score"] = s.score;
    item["intent_id"] = s.intent_id;
    item["entry_index"] = s.entry_index;
    out["suggestions"].push_back(std::move(item));
  }
  out["model_id"] = engine->model_id;
  std::cout << out.dump() << "\n";
  return 0;
}

int RunServe(const Overrides& o, const std::string& model_path,
             const std::string& responses_path, const std::string& static_dir) {
  const EngineConfig config = o.Resolve();
  csreply::SuggestService service({static_dir});
  if (!service.Bind(config.host, config.port)) {
    throw csreply::Error(csreply::ErrorCode::kIoError,
                         "cannot bind " + config.host + ":" +
                             std::to_string(config.port));
  }
  // Health answers 503 until the artifacts finish loading.
  std::string load_error;
  std::thread loader([&] {
    service.WaitUntilReady();
    try {
      service.SetEngine(
          csreply::Engine::Load(model_path, responses_path, config.rank));
      std::cerr << "serving on http://" << config.host << ":" << config.port
                << "\n";
    } catch (const std::exception& e) {
      load_error = e.what();
      service.Stop();
    }
  });
  service.ListenAfterBind();
  loader.join();
  if (!load_error.empty()) {
    throw csreply::Error(csreply::ErrorCode::kIoError, load_error);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Code-switched smart reply engine"};
  app.require_subcommand(1);

  Overrides overrides;
  const auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", overrides.config_path,
                    "Engine config file (key = value)")
        ->check(CLI::ExistingFile);
  };

  std::string in_path, table_path, out_path, corpus_path, model_path,
      responses_path, loss_log_path, csv_path, message, static_dir;
  std::string model_name = "bi-encoder";
  std::optional<int> n;

  auto* synth = app.add_subcommand("synthesize", "Build a code-switched corpus");
  add_config(synth);
  synth->add_option("--in", in_path, "English corpus (JSONL)")->required();
  synth->add_option("--table", table_path, "Phrase table (TSV)")->required();
  synth->add_option("--out", out_path, "Output corpus (JSONL)")->required();
  overrides.Bind(synth, "--p-switch", "p_switch", "Per-clause switch probability");
  overrides.Bind(synth, "--seed", "seed", "Random seed");

  auto* train = app.add_subcommand("train", "Train the bi-encoder");
  add_config(train);
  train->add_option("--corpus", corpus_path, "Training corpus")->required();
  train->add_option("--out", out_path, "Checkpoint path")->required();
  train->add_option("--loss-log", loss_log_path, "Loss log CSV path");
  overrides.Bind(train, "--epochs", "epochs", "Epochs");
  overrides.Bind(train, "--batch-size", "batch_size", "Minibatch size");
  overrides.Bind(train, "--lr", "lr", "Learning rate");
  overrides.Bind(train, "--lambda-tr", "lambda_tr", "Translation loss weight");
  overrides.Bind(train, "--seed", "seed", "Random seed");

  auto* build = app.add_subcommand("build-responses", "Build the response set");
  add_config(build);
  build->add_option("--corpus", corpus_path, "Corpus")->required();
  build->add_option("--model", model_path, "Checkpoint")->required();
  build->add_option("--out", out_path, "Response set path")->required();
  overrides.Bind(build, "--min-count", "min_count", "Minimum reply frequency");
  overrides.Bind(build, "--max-size", "max_size", "Maximum entries");
  overrides.Bind(build, "--k-intents", "k_intents", "Number of intents");
  overrides.Bind(build, "--intent-source", "intent_source", "kmeans|sentiment");
  overrides.Bind(build, "--seed", "seed", "Random seed");

  auto* eval = app.add_subcommand("eval", "Measure MRR and latency");
  add_config(eval);
  eval->add_option("--corpus", corpus_path, "Held-out corpus")->required();
  eval->add_option("--model", model_path, "Checkpoint")->required();
  eval->add_option("--responses", responses_path, "Response set")->required();
  eval->add_option("--out", out_path, "Report JSON path")->required();
  eval->add_option("--csv", csv_path, "Table CSV path");
  eval->add_option("--model-name", model_name, "Model label in the report");
  overrides.Bind(eval, "--alpha", "alpha", "LM penalty weight");

  auto* suggest = app.add_subcommand("suggest", "Suggest replies to a message");
  add_config(suggest);
  suggest->add_option("--model", model_path, "Checkpoint")->required();
  suggest->add_option("--responses", responses_path, "Response set")->required();
  suggest->add_option("--message", message, "Incoming message")->required();
  suggest->add_option("--n", n, "Number of suggestions");
  overrides.Bind(suggest, "--alpha", "alpha", "LM penalty weight");

  auto* serve = app.add_subcommand("serve", "Run the HTTP suggestion service");
  add_config(serve);
  serve->add_option("--model", model_path, "Checkpoint")->required();
  serve->add_option("--responses", responses_path, "Response set")->required();
  serve->add_option("--static", static_dir, "Directory served at /");
  overrides.Bind(serve, "--port", "port", "Listen port");
  overrides.Bind(serve, "--host", "host", "Bind address");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      return RunSynthesize(overrides, in_path, table_path, out_path);
    }
    if (train->parsed()) {
      return RunTrain(overrides, corpus_path, out_path, loss_log_path);
    }
    if (build->parsed()) {
      return RunBuildResponses(overrides, corpus_path, model_path, out_path);
    }
    if (eval->parsed()) {
      return RunEval(overrides, corpus_path, model_path, responses_path,
                     out_path, csv_path, model_name);
    }
    if (suggest->parsed()) {
      return RunSuggest(overrides, model_path, responses_path, message, n);
    }
    if (serve->parsed()) {
      return RunServe(overrides, model_path, responses_path, static_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
