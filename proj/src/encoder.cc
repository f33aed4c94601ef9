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

#include "csreply/encoder.h"

#include <algorithm>
#include <cmath>

#include "csreply/error.h"
#include "csreply/util.h"

namespace csreply {
namespace {

constexpr double kMinNorm = 1e-12;
constexpr int kCheckpointVersion = 1;

void FillUniform(Tensor& t, Rng& rng) {
  for (double& v : t.values) v = rng.Uniform(-0.1, 0.1);
}

std::string FormatArrayValue(double v) {
  // "-0" would parse back as the integer zero and lose its sign.
  if (v == 0.0 && std::signbit(v)) return "-0.0";
  return FormatDouble17(v);
}

void Normalize(const std::vector<double>& u, const char* what,
               std::vector<double>* out, double* norm_out) {
  double norm_sq = 0.0;
  for (double x : u) norm_sq += x * x;
  const double norm = std::sqrt(norm_sq);
  if (!(norm >= kMinNorm)) {
    throw Error(ErrorCode::kDegenerateVector,
                std::string(what) + " has near-zero norm");
  }
  out->resize(u.size());
  for (size_t i = 0; i < u.size(); ++i) (*out)[i] = u[i] / norm;
  if (norm_out != nullptr) *norm_out = norm;
}

Tensor ReadTensor(const nlohmann::ordered_json& arrays, const char* name, size_t rows,
                  size_t cols) {
  auto it = arrays.find(name);
  if (it == arrays.end() || !it->is_array()) {
    throw Error(ErrorCode::kIntegrityError,
                std::string("checkpoint missing array ") + name);
  }
  if (it->size() != rows * cols) {
    throw Error(ErrorCode::kIntegrityError,
                std::string("checkpoint array ") + name + " has wrong size");
  }
  Tensor t(rows, cols);
  for (size_t i = 0; i < t.values.size(); ++i) {
    const auto& v = (*it)[i];
    if (!v.is_number()) {
      throw Error(ErrorCode::kIntegrityError,
                  std::string("non-numeric entry in ") + name);
    }
    t.values[i] = v.get<double>();
  }
  return t;
}

}  // namespace

const std::array<const char*, EncoderParams::kNumTensors>&
EncoderParams::TensorNames() {
  static const std::array<const char*, kNumTensors> kNames = {
      "E", "W1", "b1", "Wm", "bm", "Wr", "br", "T"};
  return kNames;
}

std::array<Tensor*, EncoderParams::kNumTensors> EncoderParams::Tensors() {
  return {&embeddings, &w_hidden,  &b_hidden, &w_message,
          &b_message,  &w_reply,   &b_reply,  &translation};
}

std::array<const Tensor*, EncoderParams::kNumTensors> EncoderParams::Tensors()
    const {
  return {&embeddings, &w_hidden,  &b_hidden, &w_message,
          &b_message,  &w_reply,   &b_reply,  &translation};
}

EncoderParams EncoderParams::ZerosLike() const {
  EncoderParams zeros = *this;
  for (Tensor* t : zeros.Tensors()) {
    std::fill(t->values.begin(), t->values.end(), 0.0);
  }
  return zeros;
}

bool EncoderParams::AllFinite() const {
  for (const Tensor* t : Tensors()) {
    for (double v : t->values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void EncoderParams::CheckShapes() const {
  const size_t e = dims.d_emb, h = dims.d_hid, o = dims.d_out;
  const std::array<std::pair<size_t, size_t>, kNumTensors> expected = {{
      {vocab_size, e}, {h, e}, {h, 1}, {o, h}, {o, 1}, {o, h}, {o, 1}, {o, o},
  }};
  const auto tensors = Tensors();
  for (size_t i = 0; i < kNumTensors; ++i) {
    const Tensor& t = *tensors[i];
    if (t.rows != expected[i].first || t.cols != expected[i].second ||
        t.values.size() != t.rows * t.cols) {
      throw Error(ErrorCode::kIntegrityError,
                  std::string("tensor ") + TensorNames()[i] +
                      " has inconsistent shape");
    }
  }
}

std::vector<std::pair<TokenId, double>> PoolingWeights(
    std::span<const TokenId> ids) {
  std::vector<TokenId> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  const double len = static_cast<double>(sorted.size());
  std::vector<std::pair<TokenId, double>> weights;
  for (size_t i = 0; i < sorted.size();) {
    size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    weights.emplace_back(sorted[i], static_cast<double>(j - i) / len);
    i = j;
  }
  return weights;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

EncoderParams InitParams(size_t vocab_size, const Dims& dims, uint64_t seed) {
  if (vocab_size < 1 || dims.d_emb < 1 || dims.d_hid < 1 || dims.d_out < 1) {
    throw Error(ErrorCode::kInvalidArgument, "all dimensions must be >= 1");
  }
  const size_t e = dims.d_emb, h = dims.d_hid, o = dims.d_out;
  EncoderParams p;
  p.dims = dims;
  p.vocab_size = vocab_size;
  p.embeddings = Tensor(vocab_size, e);
  p.w_hidden = Tensor(h, e);
  p.b_hidden = Tensor(h, 1);
  p.w_message = Tensor(o, h);
  p.b_message = Tensor(o, 1);
  p.w_reply = Tensor(o, h);
  p.b_reply = Tensor(o, 1);
  p.translation = Tensor(o, o);

  Rng rng(seed);
  FillUniform(p.embeddings, rng);
  FillUniform(p.w_hidden, rng);
  FillUniform(p.w_message, rng);
  FillUniform(p.w_reply, rng);
  for (size_t i = 0; i < o; ++i) p.translation(i, i) = 1.0;
  return p;
}

EncodeTrace EncodeWithTrace(const EncoderParams& params,
                            std::span<const TokenId> ids, Side side) {
  if (ids.empty()) throw Error(ErrorCode::kEmptyInput, "no token ids");
  const size_t e = params.dims.d_emb;
  const size_t h = params.dims.d_hid;
  const size_t o = params.dims.d_out;

  EncodeTrace trace;
  trace.pooled.assign(e, 0.0);
  // Pool over distinct ids in sorted order, each weighted by count / length,
  // so the result is bit-identical under permutation and repetition.
  for (const auto& [id, weight] : PoolingWeights(ids)) {
    if (id < 0 || static_cast<size_t>(id) >= params.vocab_size) {
      throw Error(ErrorCode::kInvalidArgument,
                  "token id " + std::to_string(id) + " out of range");
    }
    const auto row = params.embeddings.Row(static_cast<size_t>(id));
    for (size_t k = 0; k < e; ++k) trace.pooled[k] += weight * row[k];
  }

  trace.hidden.resize(h);
  for (size_t j = 0; j < h; ++j) {
    trace.hidden[j] = std::tanh(Dot(params.w_hidden.Row(j), trace.pooled) +
                                params.b_hidden.values[j]);
  }

  const Tensor& w = side == Side::kMessage ? params.w_message : params.w_reply;
  const Tensor& b = side == Side::kMessage ? params.b_message : params.b_reply;
  trace.output.resize(o);
  for (size_t i = 0; i < o; ++i) {
    trace.output[i] = Dot(w.Row(i), trace.hidden) + b.values[i];
  }
  Normalize(trace.output, "encoder output", &trace.embedding.values,
            &trace.norm);
  return trace;
}

Embedding Encode(const EncoderParams& params, std::span<const TokenId> ids,
                 Side side) {
  return std::move(EncodeWithTrace(params, ids, side).embedding);
}

Embedding TranslateEmbed(const EncoderParams& params, const Embedding& e) {
  const size_t o = params.dims.d_out;
  if (e.size() != o) {
    throw Error(ErrorCode::kInvalidArgument, "embedding size mismatch");
  }
  std::vector<double> projected(o);
  for (size_t i = 0; i < o; ++i) {
    projected[i] = Dot(params.translation.Row(i), e.values);
  }
  Embedding out;
  Normalize(projected, "translated embedding", &out.values, nullptr);
  return out;
}

std::string SerializeCheckpoint(const Checkpoint& checkpoint) {
  const EncoderParams& p = checkpoint.params;
  p.CheckShapes();
  if (!p.AllFinite()) {
    throw Error(ErrorCode::kNumericalError, "refusing to save non-finite params");
  }
  std::string out = "{\"version\":" + std::to_string(kCheckpointVersion);
  out += ",\"vocab_size\":" + std::to_string(p.vocab_size);
  out += ",\"dims\":{\"d_emb\":" + std::to_string(p.dims.d_emb) +
         ",\"d_hid\":" + std::to_string(p.dims.d_hid) +
         ",\"d_out\":" + std::to_string(p.dims.d_out) + "}";
  out += ",\"arrays\":{";
  const auto tensors = p.Tensors();
  for (size_t i = 0; i < tensors.size(); ++i) {
    if (i > 0) out += ',';
    out += '"';
    out += EncoderParams::TensorNames()[i];
    out += "\":[";
    const auto& values = tensors[i]->values;
    for (size_t k = 0; k < values.size(); ++k) {
      if (k > 0) out += ',';
      out += FormatArrayValue(values[k]);
    }
    out += ']';
  }
  out += "},\"vocab_min_count\":" +
         std::to_string(checkpoint.vocab.min_count());
  out += ",\"vocab\":" + nlohmann::json(checkpoint.vocab.tokens()).dump();
  out += ",\"meta\":" + checkpoint.meta.dump();
  out += "}\n";
  return out;
}

Checkpoint ParseCheckpoint(std::string_view text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("checkpoint: ") + e.what());
  }
  try {
    if (!j.contains("version") || j["version"] != kCheckpointVersion) {
      throw Error(ErrorCode::kIntegrityError, "unsupported checkpoint version");
    }
    Checkpoint ckpt;
    EncoderParams& p = ckpt.params;
    p.vocab_size = j.at("vocab_size").get<size_t>();
    const auto& dims = j.at("dims");
    p.dims = {dims.at("d_emb").get<int>(), dims.at("d_hid").get<int>(),
              dims.at("d_out").get<int>()};
    if (p.dims.d_emb < 1 || p.dims.d_hid < 1 || p.dims.d_out < 1) {
      throw Error(ErrorCode::kIntegrityError, "bad dims");
    }
    const size_t e = p.dims.d_emb, h = p.dims.d_hid, o = p.dims.d_out;
    const auto& arrays = j.at("arrays");
    p.embeddings = ReadTensor(arrays, "E", p.vocab_size, e);
    p.w_hidden = ReadTensor(arrays, "W1", h, e);
    p.b_hidden = ReadTensor(arrays, "b1", h, 1);
    p.w_message = ReadTensor(arrays, "Wm", o, h);
    p.b_message = ReadTensor(arrays, "bm", o, 1);
    p.w_reply = ReadTensor(arrays, "Wr", o, h);
    p.b_reply = ReadTensor(arrays, "br", o, 1);
    p.translation = ReadTensor(arrays, "T", o, o);
    if (!p.AllFinite()) {
      throw Error(ErrorCode::kIntegrityError, "non-finite parameter");
    }
    ckpt.vocab = Vocab::FromTokenList(
        j.at("vocab").get<std::vector<std::string>>(),
        j.value("vocab_min_count", 1));
    if (ckpt.vocab.size() != p.vocab_size) {
      throw Error(ErrorCode::kIntegrityError, "vocab size mismatch");
    }
    if (j.contains("meta")) ckpt.meta = j["meta"];
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIntegrityError, std::string("checkpoint: ") + e.what());
  }
}

void SaveCheckpoint(const std::string& path, const Checkpoint& checkpoint) {
  WriteFileOrThrow(path, SerializeCheckpoint(checkpoint));
}

Checkpoint LoadCheckpoint(const std::string& path) {
  return ParseCheckpoint(ReadFileOrThrow(path));
}

}  // namespace csreply
