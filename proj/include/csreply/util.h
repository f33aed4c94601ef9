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

#ifndef CSREPLY_UTIL_H_
#define CSREPLY_UTIL_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace csreply {

// Seeded random stream. Draws are derived from raw 64-bit engine output so
// sequences are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 bits of precision.
  double NextDouble() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * NextDouble(); }
  bool Bernoulli(double p) { return NextDouble() < p; }
  // Uniform integer in [0, n); n must be positive.
  uint64_t NextBelow(uint64_t n);

 private:
  std::mt19937_64 engine_;
};

// 64-bit FNV-1a content hash.
uint64_t Fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ULL);
std::string HexDigest(uint64_t value);
std::string Fingerprint(std::string_view data);

// Fixed 17 significant digits ("%.17g"); parses back bit-exactly.
std::string FormatDouble17(double value);

std::string ReadFileOrThrow(const std::string& path);
void WriteFileOrThrow(const std::string& path, std::string_view contents);

}  // namespace csreply

#endif  // CSREPLY_UTIL_H_
