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

#include "hybridfl/partition_voting.h"

#include <openssl/evp.h>

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "hybridfl/rng.h"
#include "hybridfl/vec_core.h"

namespace hybridfl {
namespace {

using ::testing::ElementsAre;
using ::testing::IsEmpty;

PartitionMask MaskOf(std::vector<size_t> idx, size_t dim) {
  std::sort(idx.begin(), idx.end());
  auto m = PartitionMask::Create(std::move(idx), dim);
  EXPECT_TRUE(m.ok());
  return *std::move(m);
}

// Reference PRP computed straight from libcrypto.
VoteToken ReferenceToken(const VoteKey& key, uint64_t index) {
  uint8_t block[16];
  for (int i = 0; i < 8; ++i) {
    block[i] = static_cast<uint8_t>(key.round_binding >> (56 - 8 * i));
    block[8 + i] = static_cast<uint8_t>(index >> (56 - 8 * i));
  }
  VoteToken out{};
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, key.key.data(), nullptr);
  EVP_CIPHER_CTX_set_padding(ctx, 0);
  int len = 0;
  EVP_EncryptUpdate(ctx, out.data(), &len, block, 16);
  EVP_CIPHER_CTX_free(ctx);
  return out;
}

// Counts plaintext proposals, ranks by (count desc, token asc), keeps k,
// pads with the smallest unused indices.
std::vector<size_t> BruteForcePartition(
    const std::vector<PartitionMask>& proposals, const VoteKey& key,
    size_t dim, size_t k) {
  std::map<size_t, int> counts;
  for (const PartitionMask& p : proposals) {
    for (size_t j : p.he_indices()) ++counts[j];
  }
  std::vector<std::pair<size_t, int>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return ReferenceToken(key, a.first) < ReferenceToken(key, b.first);
  });
  std::set<size_t> chosen;
  for (size_t i = 0; i < ranked.size() && chosen.size() < k; ++i) {
    chosen.insert(ranked[i].first);
  }
  for (size_t j = 0; j < dim && chosen.size() < k; ++j) chosen.insert(j);
  return {chosen.begin(), chosen.end()};
}

TEST(TargetCountTest, Examples) {
  EXPECT_EQ(TargetCount(0.0, 7), 0u);
  EXPECT_EQ(TargetCount(1.0, 7), 7u);
  EXPECT_EQ(TargetCount(0.5, 7), 4u);  // 3.5 rounds up
  EXPECT_EQ(TargetCount(0.1, 8516), 852u);
  EXPECT_EQ(TargetCount(-0.5, 7), 0u);
  EXPECT_EQ(TargetCount(1.5, 7), 7u);
}

TEST(ProposePartitionTest, MaxPicksLargestMagnitudes) {
  auto m = ProposePartition({0.1, -0.9, 0.5, 0.05}, 0.5,
                            PartitionStrategy::kMaxNorm, 0);
  ASSERT_TRUE(m.ok());
  EXPECT_THAT(m->he_indices(), ElementsAre(1, 2));
}

TEST(ProposePartitionTest, MinPicksSmallestMagnitudes) {
  auto m = ProposePartition({0.1, -0.9, 0.5, 0.05}, 0.5,
                            PartitionStrategy::kMinNorm, 0);
  ASSERT_TRUE(m.ok());
  EXPECT_THAT(m->he_indices(), ElementsAre(0, 3));
}

TEST(ProposePartitionTest, TiesGoToLowerIndex) {
  auto m = ProposePartition({1.0, -1.0, 1.0, 1.0}, 0.5,
                            PartitionStrategy::kMaxNorm, 0);
  ASSERT_TRUE(m.ok());
  EXPECT_THAT(m->he_indices(), ElementsAre(0, 1));
}

TEST(ProposePartitionTest, Boundaries) {
  ParamVector u = {3, 1, 2};
  for (PartitionStrategy s :
       {PartitionStrategy::kMaxNorm, PartitionStrategy::kMinNorm,
        PartitionStrategy::kRandom}) {
    auto none = ProposePartition(u, 0.0, s, 1);
    auto all = ProposePartition(u, 1.0, s, 1);
    ASSERT_TRUE(none.ok() && all.ok());
    EXPECT_THAT(none->he_indices(), IsEmpty());
    EXPECT_THAT(all->he_indices(), ElementsAre(0, 1, 2));
  }
}

TEST(ProposePartitionTest, RandomIsSeededAndUniform) {
  ParamVector u(10, 1.0);
  auto a = ProposePartition(u, 0.3, PartitionStrategy::kRandom, 5);
  auto b = ProposePartition(u, 0.3, PartitionStrategy::kRandom, 5);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(*a, *b);
  std::vector<int> hits(10, 0);
  for (uint64_t seed = 0; seed < 5000; ++seed) {
    auto m = ProposePartition(u, 0.3, PartitionStrategy::kRandom, seed);
    ASSERT_TRUE(m.ok());
    for (size_t j : m->he_indices()) ++hits[j];
  }
  for (int h : hits) EXPECT_NEAR(h, 1500, 150);
}

TEST(ProposePartitionTest, RejectsNonFinite) {
  EXPECT_FALSE(ProposePartition({1.0, std::nan("")}, 0.5,
                                PartitionStrategy::kMaxNorm, 0)
                   .ok());
}

TEST(VoteKeyTest, TokensAreRoundBoundAndInjective) {
  VoteKey k0 = VoteKey::Derive(1, 0);
  VoteKey k1 = VoteKey::Derive(1, 1);
  auto m = EncryptIndices(MaskOf({0, 1, 2, 3}, 4), k0, 0);
  auto m1 = EncryptIndices(MaskOf({0}, 4), k1, 0);
  ASSERT_TRUE(m.ok() && m1.ok());
  std::set<VoteToken> unique(m->tokens.begin(), m->tokens.end());
  EXPECT_EQ(unique.size(), 4u);
  EXPECT_NE(m->tokens[0], m1->tokens[0]);
  for (size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(m->tokens[j], ReferenceToken(k0, j));
  }
  EXPECT_NE(VoteKey::Derive(1, 0).key, VoteKey::Derive(2, 0).key);
}

TEST(TallyTest, FigureScenarioSelectsOneAndFour) {
  const VoteKey key = VoteKey::Derive(3, 0);
  std::vector<VoteMessage> msgs;
  std::vector<std::vector<size_t>> proposals = {{1, 4}, {1, 2}, {1, 4}};
  for (uint32_t i = 0; i < proposals.size(); ++i) {
    auto m = EncryptIndices(MaskOf(proposals[i], 6), key, i);
    ASSERT_TRUE(m.ok());
    msgs.push_back(*m);
  }
  auto winners = TallyVotes(msgs, 2);
  ASSERT_TRUE(winners.ok());
  auto mask = DecodePartition(*winners, key, 6, 2);
  ASSERT_TRUE(mask.ok());
  EXPECT_THAT(mask->he_indices(), ElementsAre(1, 4));
}

TEST(TallyTest, SingleVoterWinsVerbatim) {
  const VoteKey key = VoteKey::Derive(3, 0);
  auto m = EncryptIndices(MaskOf({2, 5, 7}, 10), key, 0);
  ASSERT_TRUE(m.ok());
  std::vector<VoteMessage> msgs = {*m};
  auto winners = TallyVotes(msgs, 3);
  ASSERT_TRUE(winners.ok());
  auto mask = DecodePartition(*winners, key, 10, 3);
  ASSERT_TRUE(mask.ok());
  EXPECT_THAT(mask->he_indices(), ElementsAre(2, 5, 7));
}

TEST(TallyTest, PadsWithSmallestUnusedIndices) {
  const VoteKey key = VoteKey::Derive(3, 0);
  auto m = EncryptIndices(MaskOf({6}, 10), key, 0);
  ASSERT_TRUE(m.ok());
  std::vector<VoteMessage> msgs = {*m};
  auto winners = TallyVotes(msgs, 3);
  ASSERT_TRUE(winners.ok());
  EXPECT_EQ(winners->size(), 1u);
  auto mask = DecodePartition(*winners, key, 10, 3);
  ASSERT_TRUE(mask.ok());
  EXPECT_THAT(mask->he_indices(), ElementsAre(0, 1, 6));
}

TEST(TallyTest, RejectsBadInput) {
  const VoteKey key = VoteKey::Derive(3, 0);
  auto m = EncryptIndices(MaskOf({1}, 4), key, 0);
  ASSERT_TRUE(m.ok());
  VoteMessage dup = *m;
  dup.tokens.push_back(dup.tokens[0]);
  std::vector<VoteMessage> msgs = {dup};
  EXPECT_FALSE(TallyVotes(msgs, 1).ok());
  msgs = {*m};
  EXPECT_FALSE(TallyVotes(msgs, -1).ok());
}

TEST(DecodeTest, RejectsForeignTokens) {
  const VoteKey key = VoteKey::Derive(3, 0);
  const VoteKey other_round = VoteKey::Derive(3, 1);
  auto m = EncryptIndices(MaskOf({1}, 4), other_round, 0);
  ASSERT_TRUE(m.ok());
  EXPECT_FALSE(DecodePartition(m->tokens, key, 4, 1).ok());
  auto big = EncryptIndices(MaskOf({9}, 10), key, 0);
  ASSERT_TRUE(big.ok());
  EXPECT_FALSE(DecodePartition(big->tokens, key, 4, 1).ok());
}

TEST(VotingOracleTest, MatchesBruteForce) {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const size_t dim = 1 + rng.UniformIndex(64);
    const size_t n = 1 + rng.UniformIndex(16);
    const size_t k = rng.UniformIndex(dim + 1);
    const VoteKey key = VoteKey::Derive(rng.NextU64(), rng.UniformIndex(100));
    std::vector<PartitionMask> proposals;
    std::vector<VoteMessage> msgs;
    for (size_t i = 0; i < n; ++i) {
      const size_t size = rng.UniformIndex(dim + 1);
      proposals.push_back(MaskOf(rng.SampleWithoutReplacement(dim, size), dim));
      auto m = EncryptIndices(proposals.back(), key, static_cast<uint32_t>(i));
      ASSERT_TRUE(m.ok());
      msgs.push_back(*m);
    }
    auto winners = TallyVotes(msgs, static_cast<int64_t>(k));
    ASSERT_TRUE(winners.ok());
    auto mask = DecodePartition(*winners, key, dim, k);
    ASSERT_TRUE(mask.ok());
    std::vector<size_t> got(mask->he_indices().begin(),
                            mask->he_indices().end());
    EXPECT_EQ(got, BruteForcePartition(proposals, key, dim, k))
        << "trial " << trial;
  }
}

TEST(VoteMessageTest, WireRoundTrip) {
  const VoteKey key = VoteKey::Derive(8, 2);
  auto m = EncryptIndices(MaskOf({0, 3, 9}, 12), key, 77);
  ASSERT_TRUE(m.ok());
  std::string bytes = EncodeVoteMessage(*m);
  EXPECT_EQ(bytes.size(), 8u + 3 * kVoteTokenSize);
  EXPECT_EQ(static_cast<uint8_t>(bytes[3]), 77);
  auto back = DecodeVoteMessage(bytes);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, *m);
  EXPECT_FALSE(DecodeVoteMessage(bytes.substr(0, bytes.size() - 1)).ok());
  EXPECT_FALSE(DecodeVoteMessage(bytes + "x").ok());
}

TEST(StrategyTest, ParseNames) {
  EXPECT_EQ(*ParsePartitionStrategy("max"), PartitionStrategy::kMaxNorm);
  EXPECT_EQ(*ParsePartitionStrategy("min"), PartitionStrategy::kMinNorm);
  EXPECT_EQ(*ParsePartitionStrategy("random"), PartitionStrategy::kRandom);
  EXPECT_FALSE(ParsePartitionStrategy("median").ok());
}

}  // namespace
}  // namespace hybridfl
