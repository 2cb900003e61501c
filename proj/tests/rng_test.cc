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

#include "hybridfl/rng.h"

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace hybridfl {
namespace {

TEST(RngTest, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.NextU64(), b.NextU64());
}

TEST(RngTest, EngineMatchesStandardReference) {
  // The standard fixes the 10000th output of a default-seeded mt19937_64.
  Rng rng(5489u);
  uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.NextU64();
  EXPECT_EQ(v, 9981545732273789042ull);
}

TEST(RngTest, DeriveSeedSeparatesStreams) {
  std::set<uint64_t> seeds;
  for (uint64_t round = 0; round < 20; ++round) {
    for (uint64_t client = 0; client < 20; ++client) {
      seeds.insert(DeriveSeed(7, StreamTag::kDpNoise, {round, client}));
      seeds.insert(DeriveSeed(7, StreamTag::kLocalTrain, {round, client}));
    }
  }
  EXPECT_EQ(seeds.size(), 800u);
  EXPECT_NE(DeriveSeed(1, {2, 3}), DeriveSeed(1, {3, 2}));
  EXPECT_EQ(DeriveSeed(9, StreamTag::kData), DeriveSeed(9, StreamTag::kData));
}

TEST(RngTest, Uniform01InRange) {
  Rng rng(3);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    double u = rng.Uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(RngTest, UniformIndexCoversRangeEvenly) {
  Rng rng(11);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.UniformIndex(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(RngTest, GaussianMoments) {
  Rng rng(5);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double z = rng.Gaussian();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(sq / n - mean * mean, 1.0, 0.015);
}

TEST(RngTest, GammaMean) {
  for (double shape : {0.3, 1.0, 4.5}) {
    Rng rng(17);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      double g = rng.Gamma(shape);
      ASSERT_GT(g, 0.0);
      sum += g;
    }
    EXPECT_NEAR(sum / n, shape, 0.03 * shape + 0.01) << "shape " << shape;
  }
}

TEST(RngTest, ShuffleIsPermutation) {
  Rng rng(8);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  rng.Shuffle(absl::MakeSpan(v));
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(RngTest, SampleWithoutReplacementDistinct) {
  Rng rng(21);
  for (size_t k : {0u, 1u, 5u, 10u}) {
    std::vector<size_t> s = rng.SampleWithoutReplacement(10, k);
    ASSERT_EQ(s.size(), k);
    std::set<size_t> unique(s.begin(), s.end());
    EXPECT_EQ(unique.size(), k);
    for (size_t i : s) EXPECT_LT(i, 10u);
  }
}

}  // namespace
}  // namespace hybridfl
