/*
 * Copyright 2026 The hybridfl Authors
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

#ifndef HYBRIDFL_RNG_H_
#define HYBRIDFL_RNG_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "absl/types/span.h"

namespace hybridfl {

// Stream tags mixed into derived seeds so that independent consumers of the
// same (experiment, round, client) tuple never share a random stream.
enum class StreamTag : uint64_t {
  kData = 1,
  kTestSplit = 2,
  kClientSplit = 3,
  kModelInit = 4,
  kClientSample = 5,
  kLocalTrain = 6,
  kDpNoise = 7,
  kPartition = 8,
  kHeKeygen = 9,
  kHeEncrypt = 10,
  kVoteKey = 11,
};

// SplitMix64 finalizer.
uint64_t Mix64(uint64_t x);

// Deterministically derives a stream seed from a base seed and a path of
// integer labels, e.g. DeriveSeed(seed, {tag, round, client}).
uint64_t DeriveSeed(uint64_t base, std::initializer_list<uint64_t> path);
uint64_t DeriveSeed(uint64_t base, StreamTag tag,
                    std::initializer_list<uint64_t> path = {});

// Seeded random stream with platform-independent output. The engine is
// std::mt19937_64, whose output sequence is fixed by the standard; all
// distributions are implemented here instead of using <random>'s
// implementation-defined ones. Gaussians use the Box-Muller transform.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of precision.
  double Uniform01();

  // Uniform integer on [0, n). Requires n > 0.
  uint64_t UniformIndex(uint64_t n);

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double Gaussian();
  double Gaussian(double mean, double stddev) {
    return mean + stddev * Gaussian();
  }

  // Gamma(shape, 1) via Marsaglia-Tsang, with the U^(1/shape) boost for
  // shape < 1. Requires shape > 0.
  double Gamma(double shape);

  // Fisher-Yates shuffle.
  template <typename T>
  void Shuffle(absl::Span<T> values) {
    for (size_t i = values.size(); i > 1; --i) {
      size_t j = UniformIndex(i);
      std::swap(values[i - 1], values[j]);
    }
  }

  // k distinct indices from [0, n), in sampling order. Requires k <= n.
  std::vector<size_t> SampleWithoutReplacement(size_t n, size_t k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hybridfl

#endif  // HYBRIDFL_RNG_H_
