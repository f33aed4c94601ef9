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

#include "csreply/trainer.h"

#include <cmath>
#include <numeric>

#include "csreply/error.h"
#include "csreply/util.h"

namespace csreply {
namespace {

// Keeps the shuffling stream independent of parameter initialization.
constexpr uint64_t kShuffleStream = 0x9e3779b97f4a7c15ULL;

void AddScaled(std::span<double> dst, std::span<const double> src,
               double scale) {
  for (size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
}

// Accumulates d(loss)/d(params) given d(loss)/d(embedding) for one encode.
void BackpropEncoder(const EncoderParams& params, const EncodeTrace& trace,
                     std::span<const TokenId> ids, Side side,
                     std::span<const double> grad_embedding,
                     EncoderParams* grads) {
  const size_t e = params.dims.d_emb;
  const size_t h = params.dims.d_hid;
  const size_t o = params.dims.d_out;
  const std::vector<double>& unit = trace.embedding.values;

  // Through u / |u|.
  const double radial = Dot(grad_embedding, unit);
  std::vector<double> grad_output(o);
  for (size_t i = 0; i < o; ++i) {
    grad_output[i] = (grad_embedding[i] - radial * unit[i]) / trace.norm;
  }

  const Tensor& w = side == Side::kMessage ? params.w_message : params.w_reply;
  Tensor& dw = side == Side::kMessage ? grads->w_message : grads->w_reply;
  Tensor& db = side == Side::kMessage ? grads->b_message : grads->b_reply;
  std::vector<double> grad_hidden(h, 0.0);
  for (size_t i = 0; i < o; ++i) {
    AddScaled(dw.Row(i), trace.hidden, grad_output[i]);
    db.values[i] += grad_output[i];
    AddScaled(grad_hidden, w.Row(i), grad_output[i]);
  }

  std::vector<double> grad_pooled(e, 0.0);
  for (size_t j = 0; j < h; ++j) {
    const double z = trace.hidden[j];
    const double grad_pre = grad_hidden[j] * (1.0 - z * z);
    AddScaled(grads->w_hidden.Row(j), trace.pooled, grad_pre);
    grads->b_hidden.values[j] += grad_pre;
    AddScaled(grad_pooled, params.w_hidden.Row(j), grad_pre);
  }

  for (const auto& [id, weight] : PoolingWeights(ids)) {
    AddScaled(grads->embeddings.Row(static_cast<size_t>(id)), grad_pooled,
              weight);
  }
}

std::vector<EncodeTrace> EncodeAll(const EncoderParams& params,
                                   const std::vector<IdSeq>& seqs, Side side) {
  std::vector<EncodeTrace> traces;
  traces.reserve(seqs.size());
  for (const IdSeq& ids : seqs) {
    traces.push_back(EncodeWithTrace(params, ids, side));
  }
  return traces;
}

Tensor SimilarityFromTraces(const std::vector<EncodeTrace>& messages,
                            const std::vector<EncodeTrace>& replies) {
  const size_t b = messages.size();
  Tensor s(b, b);
  for (size_t i = 0; i < b; ++i) {
    for (size_t j = 0; j < b; ++j) {
      s(i, j) = std::exp(
          Dot(messages[i].embedding.values, replies[j].embedding.values));
    }
  }
  return s;
}

// Row and column sums of s minus the shared diagonal entry.
std::vector<double> Denominators(const Tensor& s) {
  const size_t b = s.rows;
  std::vector<double> row(b, 0.0), col(b, 0.0);
  for (size_t i = 0; i < b; ++i) {
    for (size_t j = 0; j < b; ++j) {
      row[i] += s(i, j);
      col[j] += s(i, j);
    }
  }
  std::vector<double> denom(b);
  for (size_t i = 0; i < b; ++i) {
    denom[i] = row[i] + col[i] - s(i, i);
    if (!(denom[i] > 0.0) || !std::isfinite(denom[i])) {
      throw Error(ErrorCode::kNumericalError,
                  "non-positive symmetric loss denominator");
    }
  }
  return denom;
}

}  // namespace

void Batch::Validate() const {
  const size_t b = message_ids.size();
  if (b == 0) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  if (reply_ids.size() != b ||
      (translation_ids && translation_ids->size() != b)) {
    throw Error(ErrorCode::kInvalidArgument, "batch lists differ in length");
  }
  const auto any_empty = [](const std::vector<IdSeq>& seqs) {
    for (const IdSeq& s : seqs) {
      if (s.empty()) return true;
    }
    return false;
  };
  if (any_empty(message_ids) || any_empty(reply_ids) ||
      (translation_ids && any_empty(*translation_ids))) {
    throw Error(ErrorCode::kEmptyInput, "batch holds an empty sequence");
  }
}

void TrainConfig::Validate() const {
  if (!(lr >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lr must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "betas must be in [0, 1)");
  }
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be > 0");
  if (epochs < 0) {
    throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 0");
  }
  if (batch_size < 2) {
    throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 2");
  }
  if (!(lambda_tr >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda_tr must be >= 0");
  }
}

Tensor SimilarityMatrix(const EncoderParams& params, const Batch& batch) {
  batch.Validate();
  return SimilarityFromTraces(
      EncodeAll(params, batch.message_ids, Side::kMessage),
      EncodeAll(params, batch.reply_ids, Side::kReply));
}

double SymmetricLoss(const Tensor& s) {
  if (s.rows == 0 || s.rows != s.cols) {
    throw Error(ErrorCode::kInvalidArgument, "similarity must be square");
  }
  for (double v : s.values) {
    if (!(v > 0.0)) {
      throw Error(ErrorCode::kNumericalError, "similarity must be positive");
    }
  }
  const std::vector<double> denom = Denominators(s);
  double sum = 0.0;
  for (size_t i = 0; i < s.rows; ++i) sum += std::log(s(i, i) / denom[i]);
  return -sum / static_cast<double>(s.rows);
}

double TranslationLoss(const EncoderParams& params, const Batch& batch) {
  batch.Validate();
  if (!batch.translation_ids) {
    throw Error(ErrorCode::kMissingTranslations, "batch has no translations");
  }
  double sum = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const Embedding english =
        Encode(params, batch.message_ids[i], Side::kMessage);
    const Embedding second =
        Encode(params, (*batch.translation_ids)[i], Side::kMessage);
    sum += 1.0 - Dot(TranslateEmbed(params, english).values, second.values);
  }
  return sum / static_cast<double>(batch.size());
}

GradResult ComputeGradients(const EncoderParams& params, const Batch& batch,
                            const TrainConfig& config) {
  batch.Validate();
  const size_t b = batch.size();
  const double inv_b = 1.0 / static_cast<double>(b);
  const size_t o = params.dims.d_out;

  const auto messages = EncodeAll(params, batch.message_ids, Side::kMessage);
  const auto replies = EncodeAll(params, batch.reply_ids, Side::kReply);
  const Tensor s = SimilarityFromTraces(messages, replies);
  const std::vector<double> denom = Denominators(s);

  GradResult result;
  result.grads = params.ZerosLike();
  double log_sum = 0.0;
  for (size_t i = 0; i < b; ++i) log_sum += std::log(s(i, i) / denom[i]);
  result.loss.mr_loss = -log_sum * inv_b;

  // d(mr_loss)/d(m_a . r_b).
  Tensor coupling(b, b);
  for (size_t a = 0; a < b; ++a) {
    for (size_t c = 0; c < b; ++c) {
      double g = s(a, c) * (1.0 / denom[a] + 1.0 / denom[c]);
      if (a == c) g -= s(a, a) / denom[a] + 1.0;
      coupling(a, c) = g * inv_b;
    }
  }
  std::vector<std::vector<double>> grad_m(b, std::vector<double>(o, 0.0));
  std::vector<std::vector<double>> grad_r(b, std::vector<double>(o, 0.0));
  for (size_t a = 0; a < b; ++a) {
    for (size_t c = 0; c < b; ++c) {
      AddScaled(grad_m[a], replies[c].embedding.values, coupling(a, c));
      AddScaled(grad_r[c], messages[a].embedding.values, coupling(a, c));
    }
  }

  if (batch.translation_ids) {
    const double weight = config.lambda_tr * inv_b;
    const auto seconds =
        EncodeAll(params, *batch.translation_ids, Side::kMessage);
    double tr_sum = 0.0;
    for (size_t i = 0; i < b; ++i) {
      const std::vector<double>& m = messages[i].embedding.values;
      const std::vector<double>& v = seconds[i].embedding.values;
      std::vector<double> projected(o);
      for (size_t r = 0; r < o; ++r) {
        projected[r] = Dot(params.translation.Row(r), m);
      }
      const double norm = std::sqrt(Dot(projected, projected));
      if (!(norm >= 1e-12)) {
        throw Error(ErrorCode::kDegenerateVector,
                    "translated embedding has near-zero norm");
      }
      std::vector<double> t(o);
      for (size_t r = 0; r < o; ++r) t[r] = projected[r] / norm;
      const double cosine = Dot(t, v);
      tr_sum += 1.0 - cosine;

      // d/dt = -weight * v, d/dv = -weight * t.
      std::vector<double> grad_projected(o);
      const double radial = -weight * cosine;
      for (size_t r = 0; r < o; ++r) {
        grad_projected[r] = (-weight * v[r] - radial * t[r]) / norm;
      }
      for (size_t r = 0; r < o; ++r) {
        AddScaled(result.grads.translation.Row(r), m, grad_projected[r]);
        AddScaled(grad_m[i], params.translation.Row(r), grad_projected[r]);
      }
      std::vector<double> grad_v(o);
      for (size_t r = 0; r < o; ++r) grad_v[r] = -weight * t[r];
      BackpropEncoder(params, seconds[i], (*batch.translation_ids)[i],
                      Side::kMessage, grad_v, &result.grads);
    }
    result.loss.tr_loss = tr_sum * inv_b;
  }

  for (size_t i = 0; i < b; ++i) {
    BackpropEncoder(params, messages[i], batch.message_ids[i], Side::kMessage,
                    grad_m[i], &result.grads);
    BackpropEncoder(params, replies[i], batch.reply_ids[i], Side::kReply,
                    grad_r[i], &result.grads);
  }
  result.loss.total =
      result.loss.mr_loss + config.lambda_tr * result.loss.tr_loss;
  if (!std::isfinite(result.loss.total)) {
    throw Error(ErrorCode::kNumericalError, "non-finite loss");
  }
  return result;
}

AdamOptimizer::AdamOptimizer(const EncoderParams& like,
                             const TrainConfig& config)
    : lr_(config.lr),
      beta1_(config.beta1),
      beta2_(config.beta2),
      eps_(config.eps),
      first_moment_(like.ZerosLike()),
      second_moment_(like.ZerosLike()) {}

void AdamOptimizer::Step(EncoderParams& params, const EncoderParams& grads) {
  ++steps_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  auto p = params.Tensors();
  auto g = grads.Tensors();
  auto m = first_moment_.Tensors();
  auto v = second_moment_.Tensors();
  for (size_t t = 0; t < EncoderParams::kNumTensors; ++t) {
    for (size_t k = 0; k < p[t]->values.size(); ++k) {
      const double grad = g[t]->values[k];
      double& m1 = m[t]->values[k];
      double& m2 = v[t]->values[k];
      m1 = beta1_ * m1 + (1.0 - beta1_) * grad;
      m2 = beta2_ * m2 + (1.0 - beta2_) * grad * grad;
      const double step =
          lr_ * (m1 / correction1) / (std::sqrt(m2 / correction2) + eps_);
      p[t]->values[k] -= step;
    }
  }
}

std::vector<TrainingExample> PrepareExamples(std::span<const MRPair> corpus,
                                             const Vocab& vocab) {
  std::vector<TrainingExample> examples;
  examples.reserve(corpus.size());
  for (const MRPair& pair : corpus) {
    TrainingExample ex;
    ex.message = EncodeIds(Tokenize(pair.message), vocab);
    ex.reply = EncodeIds(Tokenize(pair.reply), vocab);
    if (ex.message.empty() || ex.reply.empty()) continue;
    if (pair.message_translation) {
      IdSeq t = EncodeIds(Tokenize(*pair.message_translation), vocab);
      if (!t.empty()) ex.translation = std::move(t);
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

std::vector<Batch> MakeBatches(std::span<const TrainingExample> examples,
                               std::span<const size_t> order, int batch_size) {
  std::vector<Batch> batches;
  const size_t step = static_cast<size_t>(batch_size);
  for (size_t start = 0; start < order.size(); start += step) {
    const size_t end = std::min(order.size(), start + step);
    if (end - start < 2) break;
    Batch batch;
    bool all_translated = true;
    for (size_t k = start; k < end; ++k) {
      const TrainingExample& ex = examples[order[k]];
      batch.message_ids.push_back(ex.message);
      batch.reply_ids.push_back(ex.reply);
      all_translated = all_translated && ex.translation.has_value();
    }
    if (all_translated) {
      batch.translation_ids.emplace();
      for (size_t k = start; k < end; ++k) {
        batch.translation_ids->push_back(*examples[order[k]].translation);
      }
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

TrainResult Train(std::span<const MRPair> corpus, const Vocab& vocab,
                  const TrainConfig& config, const Dims& dims) {
  return Train(corpus, vocab, config,
               InitParams(vocab.size(), dims, config.seed));
}

TrainResult Train(std::span<const MRPair> corpus, const Vocab& vocab,
                  const TrainConfig& config, EncoderParams initial) {
  config.Validate();
  initial.CheckShapes();
  if (initial.vocab_size != vocab.size()) {
    throw Error(ErrorCode::kInvalidArgument, "params/vocab size mismatch");
  }
  const std::vector<TrainingExample> examples = PrepareExamples(corpus, vocab);
  if (examples.size() < 2) {
    throw Error(ErrorCode::kEmptyCorpus,
                "need at least 2 non-empty pairs to train");
  }

  TrainResult result;
  result.params = std::move(initial);
  AdamOptimizer optimizer(result.params, config);
  Rng rng(config.seed ^ kShuffleStream);
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) {
      for (size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[rng.NextBelow(i + 1)]);
      }
    }
    EpochLoss entry;
    entry.epoch = epoch;
    const std::vector<Batch> batches =
        MakeBatches(examples, order, config.batch_size);
    for (const Batch& batch : batches) {
      GradResult g = ComputeGradients(result.params, batch, config);
      optimizer.Step(result.params, g.grads);
      entry.mr_loss += g.loss.mr_loss;
      entry.tr_loss += g.loss.tr_loss;
      entry.total += g.loss.total;
    }
    const double n = static_cast<double>(batches.size());
    entry.mr_loss /= n;
    entry.tr_loss /= n;
    entry.total /= n;
    result.log.push_back(entry);
  }
  if (!result.params.AllFinite()) {
    throw Error(ErrorCode::kNumericalError, "training diverged");
  }
  return result;
}

LossBreakdown EvaluateLoss(const EncoderParams& params,
                           std::span<const MRPair> corpus, const Vocab& vocab,
                           const TrainConfig& config) {
  const std::vector<TrainingExample> examples = PrepareExamples(corpus, vocab);
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const std::vector<Batch> batches =
      MakeBatches(examples, order, config.batch_size);
  if (batches.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "no batches to evaluate");
  }
  LossBreakdown mean;
  for (const Batch& batch : batches) {
    const double mr = SymmetricLoss(SimilarityMatrix(params, batch));
    const double tr =
        batch.translation_ids ? TranslationLoss(params, batch) : 0.0;
    mean.mr_loss += mr;
    mean.tr_loss += tr;
    mean.total += mr + config.lambda_tr * tr;
  }
  const double n = static_cast<double>(batches.size());
  mean.mr_loss /= n;
  mean.tr_loss /= n;
  mean.total /= n;
  return mean;
}

std::string LossLogCsv(std::span<const EpochLoss> log) {
  std::string out = "epoch,mr_loss,tr_loss,total\n";
  for (const EpochLoss& e : log) {
    out += std::to_string(e.epoch) + "," + FormatDouble17(e.mr_loss) + "," +
           FormatDouble17(e.tr_loss) + "," + FormatDouble17(e.total) + "\n";
  }
  return out;
}

}  // namespace csreply
