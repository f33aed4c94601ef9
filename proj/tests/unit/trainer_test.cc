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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "csreply/error.h"
#include "csreply/util.h"
#include "fixtures.h"
#include "oracles.h"

namespace csreply {
namespace {

constexpr Dims kTiny{4, 6, 4};
constexpr size_t kTinyVocab = 20;

IdSeq RandomIds(Rng& rng, size_t lo, size_t hi, size_t max_len) {
  IdSeq ids(1 + rng.NextBelow(max_len));
  for (TokenId& id : ids) id = static_cast<TokenId>(lo + rng.NextBelow(hi - lo));
  return ids;
}

Batch RandomBatch(Rng& rng, size_t b, bool translations) {
  Batch batch;
  for (size_t i = 0; i < b; ++i) {
    batch.message_ids.push_back(RandomIds(rng, 2, kTinyVocab, 4));
    batch.reply_ids.push_back(RandomIds(rng, 2, kTinyVocab, 4));
  }
  if (translations) {
    batch.translation_ids.emplace();
    for (size_t i = 0; i < b; ++i)
      batch.translation_ids->push_back(RandomIds(rng, 2, kTinyVocab, 4));
  }
  return batch;
}

EncoderParams RandomParams(Rng& rng, double scale, uint64_t seed) {
  EncoderParams p = InitParams(kTinyVocab, kTiny, seed);
  for (Tensor* t : p.Tensors())
    for (double& v : t->values) v += rng.Uniform(-scale, scale);
  return p;
}

Tensor RandomPositive(Rng& rng, size_t b) {
  Tensor s(b, b);
  for (double& v : s.values) v = std::exp(rng.Uniform(-1.0, 1.0));
  return s;
}

// Lower bound on the symmetric loss of any B x B batch of unit vectors:
// log(1 + 2(B-1) exp(-B/(B-1))), reached by antipodal pairs at B = 2.
double InBatchFloor(size_t b) {
  const double n = static_cast<double>(b);
  return std::log(1.0 + 2.0 * (n - 1.0) * std::exp(-n / (n - 1.0)));
}

// ---------------------------------------------------------------------------
// Similarity matrix and symmetric loss.

TEST(SimilarityMatrixTest, SingleRowIsBounded) {
  Rng rng(1);
  const EncoderParams p = RandomParams(rng, 0.5, 1);
  const Batch batch = RandomBatch(rng, 1, false);
  const Tensor s = SimilarityMatrix(p, batch);
  ASSERT_EQ(s.rows, 1u);
  EXPECT_GE(s(0, 0), std::exp(-1.0) - 1e-12);
  EXPECT_LE(s(0, 0), std::exp(1.0) + 1e-12);
}

TEST(SimilarityMatrixTest, RepeatedPairGivesConstantMatrix) {
  const EncoderParams p = InitParams(kTinyVocab, kTiny, 2);
  Batch batch;
  for (int i = 0; i < 4; ++i) {
    batch.message_ids.push_back({3, 4});
    batch.reply_ids.push_back({5});
  }
  const Tensor s = SimilarityMatrix(p, batch);
  for (double v : s.values) EXPECT_EQ(v, s(0, 0));
}

TEST(SimilarityMatrixTest, MatchesDoubleLoopOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const EncoderParams p = RandomParams(rng, 0.5, trial);
    const Batch batch = RandomBatch(rng, 3, false);
    const Tensor s = SimilarityMatrix(p, batch);
    for (size_t i = 0; i < 3; ++i) {
      for (size_t j = 0; j < 3; ++j) {
        const auto& m = batch.message_ids[i];
        const auto& r = batch.reply_ids[j];
        const double want = std::exp(oracle::DotV(
            oracle::NaiveEncode(p, std::vector<int>(m.begin(), m.end()), true),
            oracle::NaiveEncode(p, std::vector<int>(r.begin(), r.end()),
                                false)));
        EXPECT_NEAR(s(i, j), want, 1e-9);
      }
    }
  }
}

TEST(SymmetricLossTest, SingleRowIsExactlyZero) {
  Tensor s(1, 1);
  s(0, 0) = 1.7;
  EXPECT_EQ(SymmetricLoss(s), 0.0);
}

TEST(SymmetricLossTest, EqualEntriesGiveLogThree) {
  Tensor s(2, 2);
  for (double& v : s.values) v = 2.5;
  EXPECT_NEAR(SymmetricLoss(s), std::log(3.0), 1e-12);
}

TEST(SymmetricLossTest, MatchesBruteForceOracle) {
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const size_t b = 1 + rng.NextBelow(6);
    const Tensor s = RandomPositive(rng, b);
    EXPECT_NEAR(SymmetricLoss(s),
                oracle::BruteForceSymmetricLoss(oracle::ToMat(s)), 1e-12);
  }
}

TEST(SymmetricLossTest, NonNegativeOnRandomMatrices) {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const Tensor s = RandomPositive(rng, 1 + rng.NextBelow(8));
    EXPECT_GE(SymmetricLoss(s), 0.0);
  }
}

TEST(SymmetricLossTest, ApproachesZeroAsDiagonalDominates) {
  double previous = std::numeric_limits<double>::infinity();
  for (double t : {1.0, 2.0, 5.0, 10.0, 15.0}) {
    Tensor s(3, 3);
    for (size_t i = 0; i < 3; ++i)
      for (size_t j = 0; j < 3; ++j) s(i, j) = std::exp(i == j ? t : -t);
    const double loss = SymmetricLoss(s);
    EXPECT_LT(loss, previous);
    previous = loss;
  }
  EXPECT_LT(previous, 1e-12);
  EXPECT_GE(previous, 0.0);
}

TEST(SymmetricLossTest, InvariantUnderJointPermutation) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t b = 2 + rng.NextBelow(6);
    const Tensor s = RandomPositive(rng, b);
    std::vector<size_t> perm(b);
    std::iota(perm.begin(), perm.end(), size_t{0});
    for (size_t i = b; i > 1; --i) std::swap(perm[i - 1], perm[rng.NextBelow(i)]);
    Tensor permuted(b, b);
    for (size_t i = 0; i < b; ++i)
      for (size_t j = 0; j < b; ++j) permuted(i, j) = s(perm[i], perm[j]);
    EXPECT_NEAR(SymmetricLoss(permuted), SymmetricLoss(s), 1e-12);
  }
}

TEST(SymmetricLossTest, UnitVectorFloorHoldsAndIsTightAtTwo) {
  // Random unit vectors never beat the floor.
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const size_t b = 2 + rng.NextBelow(6);
    std::vector<oracle::Vec> m(b), r(b);
    for (size_t i = 0; i < b; ++i) {
      oracle::Vec x(3), y(3);
      for (double& v : x) v = rng.Uniform(-1, 1);
      for (double& v : y) v = rng.Uniform(-1, 1);
      m[i] = oracle::Unit(x);
      r[i] = rng.Bernoulli(0.5) ? m[i] : oracle::Unit(y);
    }
    Tensor s(b, b);
    for (size_t i = 0; i < b; ++i)
      for (size_t j = 0; j < b; ++j) s(i, j) = std::exp(oracle::DotV(m[i], r[j]));
    EXPECT_GE(SymmetricLoss(s), InBatchFloor(b) - 1e-12);
  }
  // Antipodal pairs reach it.
  Tensor s(2, 2);
  s(0, 0) = s(1, 1) = std::exp(1.0);
  s(0, 1) = s(1, 0) = std::exp(-1.0);
  EXPECT_NEAR(SymmetricLoss(s), InBatchFloor(2), 1e-12);
}

TEST(SymmetricLossTest, RejectsBadMatrices) {
  EXPECT_THROW(SymmetricLoss(Tensor(2, 3)), Error);
  EXPECT_THROW(SymmetricLoss(Tensor(0, 0)), Error);
  Tensor s(2, 2);
  s.values = {1.0, -1.0, 1.0, 1.0};
  EXPECT_THROW(SymmetricLoss(s), Error);
}

// ---------------------------------------------------------------------------
// Translation loss.

TEST(TranslationLossTest, IdentityOnSameIdsIsZero) {
  Rng rng(8);
  const EncoderParams p = RandomParams(rng, 0.3, 8);
  EncoderParams q = p;
  q.translation = InitParams(kTinyVocab, kTiny, 8).translation;
  Batch batch = RandomBatch(rng, 4, false);
  batch.translation_ids = batch.message_ids;
  EXPECT_NEAR(TranslationLoss(q, batch), 0.0, 1e-15);
}

TEST(TranslationLossTest, OrthogonalPairContributesOne) {
  Rng rng(9);
  EncoderParams p = RandomParams(rng, 0.3, 9);
  // T rotates each coordinate plane by 90 degrees, so T m is orthogonal to m.
  p.translation = Tensor(4, 4);
  p.translation(0, 1) = -1.0;
  p.translation(1, 0) = 1.0;
  p.translation(2, 3) = -1.0;
  p.translation(3, 2) = 1.0;
  Batch batch = RandomBatch(rng, 1, false);
  batch.translation_ids = batch.message_ids;
  EXPECT_NEAR(TranslationLoss(p, batch), 1.0, 1e-15);
}

TEST(TranslationLossTest, MatchesStraightLineOracle) {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const EncoderParams p = RandomParams(rng, 0.5, trial);
    const Batch batch = RandomBatch(rng, 3, true);
    double want = 0.0;
    for (size_t i = 0; i < 3; ++i) {
      const auto& m = batch.message_ids[i];
      const auto& t = (*batch.translation_ids)[i];
      const oracle::Vec em =
          oracle::NaiveEncode(p, std::vector<int>(m.begin(), m.end()), true);
      const oracle::Vec et =
          oracle::NaiveEncode(p, std::vector<int>(t.begin(), t.end()), true);
      want += 1.0 - oracle::DotV(
                        oracle::Unit(oracle::MatVec(
                            oracle::ToMat(p.translation), em)),
                        et);
    }
    EXPECT_NEAR(TranslationLoss(p, batch), want / 3.0, 1e-9);
  }
}

TEST(TranslationLossTest, MissingTranslationsIsAnError) {
  Rng rng(11);
  try {
    TranslationLoss(InitParams(kTinyVocab, kTiny, 1), RandomBatch(rng, 2, false));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingTranslations);
  }
}

// ---------------------------------------------------------------------------
// Gradients.

TEST(ComputeGradientsTest, MatchesCentralDifferences) {
  Rng rng(12);
  TrainConfig config;
  config.lambda_tr = 0.7;
  for (int trial = 0; trial < 5; ++trial) {
    for (bool translations : {false, true}) {
      EncoderParams p = RandomParams(rng, 0.4, trial);
      const Batch batch = RandomBatch(rng, 3, translations);
      const GradResult g = ComputeGradients(p, batch, config);
      const auto loss = [&] {
        return SymmetricLoss(SimilarityMatrix(p, batch)) +
               (translations ? config.lambda_tr * TranslationLoss(p, batch)
                             : 0.0);
      };
      const auto report =
          oracle::FiniteDifferenceCheck(p, g.grads, loss, 1e-5, 1e-6);
      EXPECT_LE(report.max_rel_error, 1e-4) << report.worst;
    }
  }
}

TEST(ComputeGradientsTest, LossBreakdownIsConsistent) {
  Rng rng(13);
  TrainConfig config;
  config.lambda_tr = 0.35;
  const EncoderParams p = RandomParams(rng, 0.4, 3);
  const Batch batch = RandomBatch(rng, 5, true);
  const LossBreakdown loss = ComputeGradients(p, batch, config).loss;
  EXPECT_NEAR(loss.total, loss.mr_loss + config.lambda_tr * loss.tr_loss,
              1e-12);
  EXPECT_NEAR(loss.mr_loss, SymmetricLoss(SimilarityMatrix(p, batch)), 1e-12);
  EXPECT_NEAR(loss.tr_loss, TranslationLoss(p, batch), 1e-12);
}

TEST(ComputeGradientsTest, UnusedTokenRowIsExactlyZero) {
  Rng rng(14);
  const EncoderParams p = RandomParams(rng, 0.4, 4);
  Batch batch = RandomBatch(rng, 3, true);  // ids drawn from [2, 20)
  const GradResult g = ComputeGradients(p, batch, TrainConfig{});
  for (TokenId unused : {Vocab::kPad, Vocab::kUnk})
    for (double v : g.grads.embeddings.Row(unused)) EXPECT_EQ(v, 0.0);
}

TEST(ComputeGradientsTest, ZeroLambdaMakesTranslationHeadIrrelevant) {
  Rng rng(15);
  TrainConfig config;
  config.lambda_tr = 0.0;
  EncoderParams p = RandomParams(rng, 0.4, 5);
  const Batch batch = RandomBatch(rng, 3, true);
  const GradResult a = ComputeGradients(p, batch, config);
  for (double& v : p.translation.values) v = rng.Uniform(-2, 2);
  const GradResult b = ComputeGradients(p, batch, config);
  for (double v : a.grads.translation.values) EXPECT_EQ(v, 0.0);
  for (double v : b.grads.translation.values) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(a.grads.embeddings, b.grads.embeddings);
  EXPECT_EQ(a.grads.w_hidden, b.grads.w_hidden);
  EXPECT_EQ(a.grads.w_message, b.grads.w_message);
  EXPECT_EQ(a.grads.w_reply, b.grads.w_reply);
}

TEST(ComputeGradientsTest, RejectsMalformedBatches) {
  const EncoderParams p = InitParams(kTinyVocab, kTiny, 1);
  Batch empty;
  EXPECT_THROW(ComputeGradients(p, empty, TrainConfig{}), Error);
  Batch ragged;
  ragged.message_ids = {{2}, {3}};
  ragged.reply_ids = {{2}};
  EXPECT_THROW(ComputeGradients(p, ragged, TrainConfig{}), Error);
  Batch hole;
  hole.message_ids = {{2}, {}};
  hole.reply_ids = {{2}, {3}};
  EXPECT_THROW(ComputeGradients(p, hole, TrainConfig{}), Error);
}

// ---------------------------------------------------------------------------
// Optimizer and training loop.

TEST(AdamOptimizerTest, ZeroGradientLeavesParamsUnchanged) {
  Rng rng(16);
  EncoderParams p = RandomParams(rng, 0.4, 6);
  const EncoderParams before = p;
  AdamOptimizer adam(p, TrainConfig{});
  for (int i = 0; i < 3; ++i) adam.Step(p, p.ZerosLike());
  EXPECT_EQ(p, before);
  EXPECT_EQ(adam.steps(), 3);
}

TEST(AdamOptimizerTest, FirstStepMovesBySignTimesLearningRate) {
  EncoderParams p = InitParams(kTinyVocab, kTiny, 1);
  const EncoderParams before = p;
  EncoderParams g = p.ZerosLike();
  g.w_hidden.values[0] = 3.0;
  g.w_hidden.values[1] = -0.5;
  TrainConfig config;
  config.lr = 0.01;
  AdamOptimizer adam(p, config);
  adam.Step(p, g);
  // Bias-corrected first step: lr * g / (|g| + eps).
  EXPECT_NEAR(p.w_hidden.values[0], before.w_hidden.values[0] - 0.01, 1e-9);
  EXPECT_NEAR(p.w_hidden.values[1], before.w_hidden.values[1] + 0.01, 1e-9);
  EXPECT_EQ(p.w_hidden.values[2], before.w_hidden.values[2]);
}

TEST(TrainConfigTest, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.batch_size = 1;
  EXPECT_THROW(c.Validate(), Error);
  c = TrainConfig{};
  c.lr = -1.0;
  EXPECT_THROW(c.Validate(), Error);
  c = TrainConfig{};
  c.beta1 = 1.0;
  EXPECT_THROW(c.Validate(), Error);
  c = TrainConfig{};
  c.lambda_tr = -0.1;
  EXPECT_THROW(c.Validate(), Error);
  c = TrainConfig{};
  c.eps = 0.0;
  EXPECT_THROW(c.Validate(), Error);
}

std::vector<MRPair> TinyCorpus() {
  std::vector<MRPair> corpus;
  for (int i = 0; i < 9; ++i) {
    MRPair p;
    p.id = std::to_string(i);
    p.message = "msg" + std::to_string(i % 3) + " hello";
    p.reply = "reply" + std::to_string(i % 3);
    corpus.push_back(p);
  }
  return corpus;
}

Vocab VocabOf(const std::vector<MRPair>& corpus) {
  std::vector<TokenSeq> seqs;
  for (const MRPair& p : corpus) {
    seqs.push_back(Tokenize(p.message));
    seqs.push_back(Tokenize(p.reply));
    if (p.message_translation) seqs.push_back(Tokenize(*p.message_translation));
  }
  return Vocab::Build(seqs, 1);
}

TEST(PrepareExamplesTest, DropsEmptyTexts) {
  std::vector<MRPair> corpus = TinyCorpus();
  corpus[1].message = " ,";  // punctuation still counts as a token
  corpus[2].reply = "   ";
  corpus[3].message_translation = "namaste";
  const Vocab vocab = VocabOf(corpus);
  const auto examples = PrepareExamples(corpus, vocab);
  EXPECT_EQ(examples.size(), 8u);
  EXPECT_TRUE(examples[2].translation.has_value());
}

TEST(MakeBatchesTest, DropsTrailingSingletonAndMixedTranslations) {
  std::vector<TrainingExample> examples(5);
  for (size_t i = 0; i < 5; ++i) {
    examples[i].message = {2};
    examples[i].reply = {3};
    if (i < 2) examples[i].translation = IdSeq{4};
  }
  const std::vector<size_t> order = {0, 1, 2, 3, 4};
  const auto batches = MakeBatches(examples, order, 2);
  ASSERT_EQ(batches.size(), 2u);
  EXPECT_TRUE(batches[0].translation_ids.has_value());
  EXPECT_FALSE(batches[1].translation_ids.has_value());
  EXPECT_EQ(MakeBatches(examples, order, 4).size(), 1u);
}

TEST(TrainTest, ZeroLearningRateLeavesParamsBitIdentical) {
  const auto corpus = TinyCorpus();
  const Vocab vocab = VocabOf(corpus);
  TrainConfig config;
  config.lr = 0.0;
  config.epochs = 1;
  config.batch_size = 4;
  const EncoderParams initial = InitParams(vocab.size(), kTiny, config.seed);
  const TrainResult result = Train(corpus, vocab, config, kTiny);
  EXPECT_EQ(result.params, initial);
  ASSERT_EQ(result.log.size(), 1u);
}

TEST(TrainTest, SameSeedSameLog) {
  const auto corpus = TinyCorpus();
  const Vocab vocab = VocabOf(corpus);
  TrainConfig config;
  config.epochs = 3;
  config.batch_size = 3;
  config.lr = 0.01;
  const TrainResult a = Train(corpus, vocab, config, kTiny);
  const TrainResult b = Train(corpus, vocab, config, kTiny);
  EXPECT_EQ(LossLogCsv(a.log), LossLogCsv(b.log));
  EXPECT_EQ(a.params, b.params);
  config.seed = 7;
  EXPECT_NE(LossLogCsv(Train(corpus, vocab, config, kTiny).log),
            LossLogCsv(a.log));
}

TEST(TrainTest, TooFewPairsIsEmptyCorpus) {
  auto corpus = TinyCorpus();
  corpus.resize(1);
  try {
    Train(corpus, VocabOf(corpus), TrainConfig{}, kTiny);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCorpus);
  }
}

TEST(TrainTest, LossLogCsvFormat) {
  std::vector<EpochLoss> log = {{1, 1.5, 0.25, 1.625}};
  EXPECT_EQ(LossLogCsv(log),
            "epoch,mr_loss,tr_loss,total\n1,1.5,0.25,1.625\n");
}

TEST(TrainTest, EvaluateLossMatchesSingleBatchGradientLoss) {
  const auto corpus = TinyCorpus();
  const Vocab vocab = VocabOf(corpus);
  TrainConfig config;
  config.batch_size = 9;
  const EncoderParams p = InitParams(vocab.size(), kTiny, 3);
  const auto examples = PrepareExamples(corpus, vocab);
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const auto batches = MakeBatches(examples, order, 9);
  ASSERT_EQ(batches.size(), 1u);
  EXPECT_NEAR(EvaluateLoss(p, corpus, vocab, config).total,
              ComputeGradients(p, batches[0], config).loss.total, 1e-12);
}

// With unit-norm embeddings and unit temperature the epoch loss cannot fall
// below roughly log(1 + 2(B-1)/e) when batches are drawn from a corpus with
// many distinct pairs, so training is judged against that attainable floor.
TEST(TrainTest, SeparableCorpusLossFallsTowardItsFloor) {
  const auto data = testing::MakeSeparableCorpus(500, 4, 17);
  const Vocab vocab = VocabOf(data.train);
  const TrainConfig config;  // defaults: 30 epochs, batch 32
  const TrainResult result = Train(data.train, vocab, config, Dims{});
  ASSERT_EQ(result.log.size(), 30u);
  const double initial = result.log.front().total;
  const double final_loss = result.log.back().total;
  const double b = config.batch_size;
  const double floor = std::log(1.0 + 2.0 * (b - 1.0) / std::exp(1.0));
  EXPECT_LT(final_loss, initial);
  EXPECT_GE(initial - final_loss, 0.5 * (initial - floor))
      << "initial " << initial << " final " << final_loss << " floor " << floor;
  EXPECT_GT(final_loss, floor - 0.05);
}

TEST(TrainTest, HalvingTheLossIsOutOfReachEvenAtBatchTwo) {
  // Relative to the untrained value ln 3, the corpus-level floor at B = 2
  // allows at most a 49.8% reduction.
  const double ceiling = 1.0 - std::log(1.0 + 2.0 / std::exp(1.0)) / std::log(3.0);
  EXPECT_LT(ceiling, 0.5);
  EXPECT_GT(ceiling, 0.49);
}

}  // namespace
}  // namespace csreply
