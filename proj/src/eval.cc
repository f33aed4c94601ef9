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

#include "csreply/eval.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

#include "csreply/error.h"
#include "csreply/ranker.h"
#include "csreply/util.h"

namespace csreply {
namespace {

size_t RankForMessage(std::string_view message, size_t truth,
                      const EncoderParams& params, const Vocab& vocab,
                      const ResponseSet& set, double alpha) {
  const TokenSeq tokens = Tokenize(message);
  if (tokens.empty()) throw Error(ErrorCode::kEmptyInput, "empty message");
  const Embedding m = Encode(params, EncodeIds(tokens, vocab), Side::kMessage);
  return RankAmong(ScoreAll(m, set, alpha), truth);
}

}  // namespace

nlohmann::ordered_json ReportToJson(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["model_name"] = report.model_name;
  j["mrr"] = report.mrr;
  j["n_queries"] = report.n_queries;
  j["n_skipped"] = report.n_skipped;
  j["response_set_size"] = report.response_set_size;
  j["latency_mean_ms"] = report.latency_mean_ms;
  j["latency_p95_ms"] = report.latency_p95_ms;
  j["baseline_mrr_closed_form"] = report.baseline_mrr_closed_form;
  j["tie_rule"] = report.tie_rule;
  return j;
}

EvalReport ReportFromJson(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.model_name = j.at("model_name").get<std::string>();
    r.mrr = j.at("mrr").get<double>();
    r.n_queries = j.at("n_queries").get<size_t>();
    r.n_skipped = j.at("n_skipped").get<size_t>();
    r.response_set_size = j.at("response_set_size").get<size_t>();
    r.latency_mean_ms = j.at("latency_mean_ms").get<double>();
    r.latency_p95_ms = j.at("latency_p95_ms").get<double>();
    r.baseline_mrr_closed_form = j.at("baseline_mrr_closed_form").get<double>();
    r.tie_rule = j.value("tie_rule", std::string("optimistic"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("report: ") + e.what());
  }
}

std::string ReportCsv(const EvalReport& report) {
  std::string out = "model,mrr,latency_mean_ms\n";
  out += "random," + FormatDouble17(report.baseline_mrr_closed_form) + ",0\n";
  out += report.model_name + "," + FormatDouble17(report.mrr) + "," +
         FormatDouble17(report.latency_mean_ms) + "\n";
  return out;
}

size_t RankAmong(std::span<const double> scores, size_t truth) {
  const double target = scores[truth];
  size_t higher = 0;
  for (double s : scores) higher += s > target ? 1 : 0;
  return higher + 1;
}

size_t RankOfTruth(std::string_view message, std::string_view true_reply,
                   const EncoderParams& params, const Vocab& vocab,
                   const ResponseSet& set, double alpha) {
  const auto truth = set.Find(true_reply);
  if (!truth) {
    throw Error(ErrorCode::kTruthNotInSet,
                "'" + std::string(true_reply) + "' is not in the response set");
  }
  return RankForMessage(message, *truth, params, vocab, set, alpha);
}

double Mrr(std::span<const size_t> ranks) {
  if (ranks.empty()) throw Error(ErrorCode::kEmptyRanks, "no ranks");
  double sum = 0.0;
  for (size_t r : ranks) {
    if (r < 1) throw Error(ErrorCode::kInvalidArgument, "rank must be >= 1");
    sum += 1.0 / static_cast<double>(r);
  }
  return sum / static_cast<double>(ranks.size());
}

double RandomBaselineMrr(size_t set_size) {
  if (set_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "set_size must be >= 1");
  }
  double harmonic = 0.0;
  for (size_t r = 1; r <= set_size; ++r) {
    harmonic += 1.0 / static_cast<double>(r);
  }
  return harmonic / static_cast<double>(set_size);
}

EvalReport RunEval(std::span<const MRPair> test_corpus,
                   const EncoderParams& params, const Vocab& vocab,
                   const ResponseSet& set, const EvalOptions& options) {
  if (test_corpus.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "empty test corpus");
  }
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < set.entries.size(); ++i) {
    index.emplace(set.entries[i].text, i);
  }

  EvalReport report;
  report.model_name = options.model_name;
  report.response_set_size = set.size();
  report.baseline_mrr_closed_form = RandomBaselineMrr(set.size());

  std::vector<size_t> ranks;
  std::vector<double> latencies_ms;
  for (const MRPair& pair : test_corpus) {
    auto truth = index.find(NormalizeText(pair.reply));
    if (truth == index.end() || Tokenize(pair.message).empty()) {
      ++report.n_skipped;
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    ranks.push_back(RankForMessage(pair.message, truth->second, params, vocab,
                                   set, options.alpha));
    const auto stop = std::chrono::steady_clock::now();
    latencies_ms.push_back(
        std::chrono::duration<double, std::milli>(stop - start).count());
  }
  if (ranks.empty()) {
    throw Error(ErrorCode::kEmptyRanks,
                "no test pair has its reply in the response set");
  }
  report.n_queries = ranks.size();
  report.mrr = Mrr(ranks);

  double sum = 0.0;
  for (double l : latencies_ms) sum += l;
  report.latency_mean_ms = sum / static_cast<double>(latencies_ms.size());
  std::sort(latencies_ms.begin(), latencies_ms.end());
  const size_t p95 = static_cast<size_t>(
      std::ceil(0.95 * static_cast<double>(latencies_ms.size())));
  report.latency_p95_ms = latencies_ms[std::max<size_t>(p95, 1) - 1];
  return report;
}

}  // namespace csreply
