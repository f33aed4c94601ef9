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

#ifndef CSREPLY_TRAINER_H_
#define CSREPLY_TRAINER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csreply/codeswitch.h"
#include "csreply/encoder.h"
#include "csreply/textproc.h"

namespace csreply {

// Row i of every list belongs to the same example; all lists have the same
// length B >= 1 and hold no empty sequences.
struct Batch {
  std::vector<IdSeq> message_ids;
  std::vector<IdSeq> reply_ids;
  // Second-language rendering of each message, if known for every row.
  std::optional<std::vector<IdSeq>> translation_ids;

  size_t size() const { return message_ids.size(); }
  void Validate() const;
};

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int epochs = 30;
  int batch_size = 32;
  double lambda_tr = 0.5;
  uint64_t seed = 42;
  bool shuffle = true;

  void Validate() const;
};

struct LossBreakdown {
  double total = 0.0;
  double mr_loss = 0.0;
  double tr_loss = 0.0;
};

// s[i][j] = exp(phi(m_i) . phi(r_j)).
Tensor SimilarityMatrix(const EncoderParams& params, const Batch& batch);

// -(1/B) sum_i log( s_ii / (sum_j s_ij + sum_k s_ki - s_ii) ).
double SymmetricLoss(const Tensor& s);

// (1/B) sum_i (1 - translate(phi_msg(m_i)) . phi_msg(t_i)).
double TranslationLoss(const EncoderParams& params, const Batch& batch);

struct GradResult {
  LossBreakdown loss;
  EncoderParams grads;  // same shapes as the parameters
};

// Exact gradient of mr_loss + lambda_tr * tr_loss. The translation term is
// present only when the batch carries translations.
GradResult ComputeGradients(const EncoderParams& params, const Batch& batch,
                            const TrainConfig& config);

class AdamOptimizer {
 public:
  AdamOptimizer(const EncoderParams& like, const TrainConfig& config);

  void Step(EncoderParams& params, const EncoderParams& grads);
  int64_t steps() const { return steps_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  EncoderParams first_moment_;
  EncoderParams second_moment_;
  int64_t steps_ = 0;
};

struct EpochLoss {
  int epoch = 0;
  double mr_loss = 0.0;
  double tr_loss = 0.0;
  double total = 0.0;
};

struct TrainResult {
  EncoderParams params;
  std::vector<EpochLoss> log;
};

// Vocab-encoded pair ready for batching.
struct TrainingExample {
  IdSeq message;
  IdSeq reply;
  std::optional<IdSeq> translation;
};

// Drops pairs whose message or reply tokenizes to nothing.
std::vector<TrainingExample> PrepareExamples(std::span<const MRPair> corpus,
                                             const Vocab& vocab);

// Consecutive runs of `batch_size` from `order`; a trailing singleton batch
// is dropped since it carries no contrastive signal.
std::vector<Batch> MakeBatches(std::span<const TrainingExample> examples,
                               std::span<const size_t> order, int batch_size);

TrainResult Train(std::span<const MRPair> corpus, const Vocab& vocab,
                  const TrainConfig& config, const Dims& dims);
TrainResult Train(std::span<const MRPair> corpus, const Vocab& vocab,
                  const TrainConfig& config, EncoderParams initial);

// Mean loss over the corpus split into batches in file order.
LossBreakdown EvaluateLoss(const EncoderParams& params,
                           std::span<const MRPair> corpus, const Vocab& vocab,
                           const TrainConfig& config);

// CSV with header "epoch,mr_loss,tr_loss,total".
std::string LossLogCsv(std::span<const EpochLoss> log);

}  // namespace csreply

#endif  // CSREPLY_TRAINER_H_
