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

#ifndef CSREPLY_ENCODER_H_
#define CSREPLY_ENCODER_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "csreply/textproc.h"
#include "json.hpp"

namespace csreply {

struct Dims {
  int d_emb = 64;
  int d_hid = 128;
  int d_out = 64;

  bool operator==(const Dims&) const = default;
};

// Dense row-major matrix. Bias vectors are stored as rows x 1.
struct Tensor {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> values;

  Tensor() = default;
  Tensor(size_t r, size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& operator()(size_t r, size_t c) { return values[r * cols + c]; }
  double operator()(size_t r, size_t c) const { return values[r * cols + c]; }
  std::span<double> Row(size_t r) { return {values.data() + r * cols, cols}; }
  std::span<const double> Row(size_t r) const {
    return {values.data() + r * cols, cols};
  }

  bool operator==(const Tensor&) const = default;
};

// Trainable state of the bi-encoder. Token embeddings and the hidden layer are
// shared; each side has its own output head. `translation` maps an English
// message embedding onto its second-language counterpart.
struct EncoderParams {
  Dims dims;
  size_t vocab_size = 0;
  Tensor embeddings;   // vocab_size x d_emb
  Tensor w_hidden;     // d_hid x d_emb
  Tensor b_hidden;     // d_hid x 1
  Tensor w_message;    // d_out x d_hid
  Tensor b_message;    // d_out x 1
  Tensor w_reply;      // d_out x d_hid
  Tensor b_reply;      // d_out x 1
  Tensor translation;  // d_out x d_out

  static constexpr size_t kNumTensors = 8;
  static const std::array<const char*, kNumTensors>& TensorNames();
  std::array<Tensor*, kNumTensors> Tensors();
  std::array<const Tensor*, kNumTensors> Tensors() const;

  // Same shapes, all zeros.
  EncoderParams ZerosLike() const;
  bool AllFinite() const;
  // Throws IntegrityError on a shape mismatch.
  void CheckShapes() const;

  bool operator==(const EncoderParams&) const = default;
};

enum class Side { kMessage, kReply };

// Unit-norm output of the encoder.
struct Embedding {
  std::vector<double> values;

  size_t size() const { return values.size(); }
  bool operator==(const Embedding&) const = default;
};

double Dot(std::span<const double> a, std::span<const double> b);

// Distinct ids in ascending order with weight count / length.
std::vector<std::pair<TokenId, double>> PoolingWeights(
    std::span<const TokenId> ids);

// Uniform [-0.1, 0.1] weights, zero biases, identity translation head.
EncoderParams InitParams(size_t vocab_size, const Dims& dims, uint64_t seed);

// Intermediate values of one forward pass, kept for backpropagation.
struct EncodeTrace {
  std::vector<double> pooled;  // mean token embedding, d_emb
  std::vector<double> hidden;  // tanh activations, d_hid
  std::vector<double> output;  // pre-normalization head output, d_out
  double norm = 0.0;
  Embedding embedding;
};

// mean-pool -> tanh(W_h x + b_h) -> side head -> L2 normalize.
Embedding Encode(const EncoderParams& params, std::span<const TokenId> ids,
                 Side side);
EncodeTrace EncodeWithTrace(const EncoderParams& params,
                            std::span<const TokenId> ids, Side side);

// (T e) / |T e|
Embedding TranslateEmbed(const EncoderParams& params, const Embedding& e);

// Checkpoint file: {"version":1, "vocab_size", "dims", "arrays":{...},
// "vocab":[...], "meta":{...}}; floats written with 17 significant digits.
struct Checkpoint {
  EncoderParams params;
  Vocab vocab;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
};

std::string SerializeCheckpoint(const Checkpoint& checkpoint);
Checkpoint ParseCheckpoint(std::string_view text);
void SaveCheckpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace csreply

#endif  // CSREPLY_ENCODER_H_
