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

#include "hybridfl/dp_engine.h"

#include <cmath>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "hybridfl/rng.h"
#include "hybridfl/vec_core.h"

namespace hybridfl {
namespace {

using ::testing::DoubleNear;
using ::testing::ElementsAre;

TEST(ClipTest, ScalesDownLongVectors) {
  auto c = Clip({3, 4}, 1.0);
  ASSERT_TRUE(c.ok());
  EXPECT_THAT(*c, ElementsAre(DoubleNear(0.6, 1e-15), DoubleNear(0.8, 1e-15)));
}

TEST(ClipTest, LeavesShortVectorsUnchanged) {
  auto c = Clip({0.3, -0.4}, 1.0);
  ASSERT_TRUE(c.ok());
  EXPECT_THAT(*c, ElementsAre(0.3, -0.4));
}

TEST(ClipTest, RejectsBadTheta) {
  EXPECT_FALSE(Clip({1.0}, 0.0).ok());
  EXPECT_FALSE(Clip({1.0}, -1.0).ok());
}

TEST(ClipTest, NormNeverExceedsTheta) {
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    ParamVector u(1 + rng.UniformIndex(40));
    const double scale = std::exp(4.0 * rng.Gaussian());
    for (double& v : u) v = scale * rng.Gaussian();
    const double theta = std::exp(rng.Gaussian());
    auto c = Clip(u, theta);
    ASSERT_TRUE(c.ok());
    EXPECT_LE(L2Norm(*c), theta * (1 + 1e-12));
  }
}

TEST(AddNoiseTest, ZeroSigmaIsIdentity) {
  auto r = AddNoise({1, 2}, 0.0, 123);
  ASSERT_TRUE(r.ok());
  EXPECT_THAT(*r, ElementsAre(1, 2));
}

TEST(AddNoiseTest, DeterministicPerSeed) {
  ParamVector u(32, 0.5);
  auto a = AddNoise(u, 0.7, 5);
  auto b = AddNoise(u, 0.7, 5);
  auto c = AddNoise(u, 0.7, 6);
  ASSERT_TRUE(a.ok() && b.ok() && c.ok());
  EXPECT_EQ(*a, *b);
  EXPECT_NE(*a, *c);
}

TEST(AddNoiseTest, SampleVarianceMatchesSigma) {
  const double sigma = 1.7;
  auto r = AddNoise(ParamVector(100000, 0.0), sigma, 2024);
  ASSERT_TRUE(r.ok());
  double sum = 0.0, sq = 0.0;
  for (double v : *r) {
    sum += v;
    sq += v * v;
  }
  const double mean = sum / r->size();
  const double var = sq / r->size() - mean * mean;
  EXPECT_NEAR(var / (sigma * sigma), 1.0, 0.02);
}

TEST(AddNoiseTest, RejectsNegativeSigma) {
  EXPECT_FALSE(AddNoise({1.0}, -0.1, 1).ok());
}

TEST(AccountantTest, Sensitivity) {
  auto s = Sensitivity(1.0, 100);
  ASSERT_TRUE(s.ok());
  EXPECT_DOUBLE_EQ(*s, 0.02);
  EXPECT_FALSE(Sensitivity(1.0, 0).ok());
  EXPECT_FALSE(Sensitivity(0.0, 10).ok());
}

// Reference values from a 40-digit evaluation of
// (2 theta / m / eps) * sqrt(2 q T ln(1/delta)).
TEST(AccountantTest, SigmaMatchesHighPrecisionReference) {
  PrivacyBudget b{.epsilon = 1.0,
                  .delta = 1e-5,
                  .q = 1.0,
                  .rounds = 50,
                  .theta = 1.0,
                  .min_dataset_size = 100};
  auto sigma = SigmaFromBudget(b);
  ASSERT_TRUE(sigma.ok());
  EXPECT_NEAR(*sigma, 0.678614042441511, 1e-13);

  PrivacyBudget unit{.epsilon = 1.0,
                     .delta = std::exp(-1.0),
                     .q = 1.0,
                     .rounds = 1,
                     .theta = 0.5,
                     .min_dataset_size = 1};
  sigma = SigmaFromBudget(unit);
  ASSERT_TRUE(sigma.ok());
  EXPECT_NEAR(*sigma, 1.41421356237310, 1e-13);
}

TEST(AccountantTest, SigmaIsInverseInEpsilon) {
  PrivacyBudget b{.epsilon = 1.0, .delta = 1e-5, .rounds = 50,
                  .min_dataset_size = 100};
  auto s1 = SigmaFromBudget(b);
  b.epsilon = 2.0;
  auto s2 = SigmaFromBudget(b);
  ASSERT_TRUE(s1.ok() && s2.ok());
  EXPECT_NEAR(*s1 / *s2, 2.0, 1e-14);
}

TEST(AccountantTest, RejectsInvalidBudgets) {
  PrivacyBudget b{.epsilon = 1.0, .delta = 1e-5, .rounds = 50,
                  .min_dataset_size = 100};
  PrivacyBudget bad = b;
  bad.delta = 1.0;
  EXPECT_FALSE(SigmaFromBudget(bad).ok());
  bad = b;
  bad.rounds = 0;
  EXPECT_FALSE(SigmaFromBudget(bad).ok());
  bad = b;
  bad.epsilon = 0.0;
  EXPECT_FALSE(SigmaFromBudget(bad).ok());
  bad = b;
  bad.q = 0.0;
  EXPECT_FALSE(SigmaFromBudget(bad).ok());
}

TEST(ProtectDpTest, ClipsThenNoises) {
  auto r = ProtectDp({3, 4}, DpParams{.theta = 1.0, .sigma_z = 0.0}, 1);
  ASSERT_TRUE(r.ok());
  EXPECT_THAT(*r, ElementsAre(DoubleNear(0.6, 1e-15), DoubleNear(0.8, 1e-15)));

  auto clipped = Clip({3, 4}, 1.0);
  auto noised = AddNoise(*clipped, 0.5, 77);
  auto composed = ProtectDp({3, 4}, DpParams{.theta = 1.0, .sigma_z = 0.5}, 77);
  ASSERT_TRUE(noised.ok() && composed.ok());
  EXPECT_EQ(*noised, *composed);
}

TEST(ProtectDpTest, EmptyPartIsEmpty) {
  auto r = ProtectDp({}, DpParams{.theta = 1.0, .sigma_z = 1.0}, 1);
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r->empty());
}

}  // namespace
}  // namespace hybridfl
