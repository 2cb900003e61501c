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

#include "he/ntt.h"

#include <vector>

#include "gtest/gtest.h"
#include "hybridfl/rng.h"

namespace hybridfl::he_internal {
namespace {

TEST(NttTest, IsPrimeSmallAndLarge) {
  EXPECT_FALSE(IsPrime(0));
  EXPECT_FALSE(IsPrime(1));
  EXPECT_TRUE(IsPrime(2));
  EXPECT_TRUE(IsPrime(97));
  EXPECT_FALSE(IsPrime(561));  // Carmichael
  EXPECT_TRUE(IsPrime(18446744073709551557ull));  // largest 64-bit prime
  EXPECT_FALSE(IsPrime(18446744073709551555ull));
}

TEST(NttTest, FindNttPrimeIsCongruent) {
  for (size_t n : {8u, 1024u, 4096u}) {
    auto q = FindNttPrime(50, n);
    ASSERT_TRUE(q.ok());
    EXPECT_TRUE(IsPrime(*q));
    EXPECT_LT(*q, uint64_t{1} << 50);
    EXPECT_EQ(*q % (2 * n), 1u);
  }
}

TEST(NttTest, RoundTrip) {
  auto q = FindNttPrime(50, 64);
  ASSERT_TRUE(q.ok());
  auto tables = NttTables::Create(64, *q);
  ASSERT_TRUE(tables.ok());
  Rng rng(1);
  std::vector<uint64_t> a(64);
  for (uint64_t& v : a) v = rng.UniformIndex(*q);
  std::vector<uint64_t> b = a;
  tables->Forward(absl::MakeSpan(b));
  EXPECT_NE(a, b);
  tables->Inverse(absl::MakeSpan(b));
  EXPECT_EQ(a, b);
}

// Pointwise products in the NTT domain equal schoolbook negacyclic products.
TEST(NttTest, MatchesNaiveNegacyclicProduct) {
  Rng rng(2);
  for (size_t n : {8u, 32u, 256u}) {
    auto q = FindNttPrime(50, n);
    ASSERT_TRUE(q.ok());
    auto tables = NttTables::Create(n, *q);
    ASSERT_TRUE(tables.ok());
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<uint64_t> a(n), b(n);
      for (uint64_t& v : a) v = rng.UniformIndex(*q);
      for (uint64_t& v : b) v = rng.UniformIndex(*q);
      std::vector<uint64_t> expected = NegacyclicMultiplyNaive(a, b, *q);
      tables->Forward(absl::MakeSpan(a));
      tables->Forward(absl::MakeSpan(b));
      for (size_t i = 0; i < n; ++i) a[i] = MulMod(a[i], b[i], *q);
      tables->Inverse(absl::MakeSpan(a));
      EXPECT_EQ(a, expected) << "n=" << n;
    }
  }
}

TEST(NttTest, NaiveWrapsWithNegation) {
  // X^(n-1) * X = X^n = -1 in Z_q[X]/(X^n + 1).
  const uint64_t q = 17;
  std::vector<uint64_t> a = {0, 0, 0, 1};
  std::vector<uint64_t> b = {0, 1, 0, 0};
  std::vector<uint64_t> c = NegacyclicMultiplyNaive(a, b, q);
  EXPECT_EQ(c, (std::vector<uint64_t>{16, 0, 0, 0}));
}

TEST(NttTest, CreateRejectsBadModulus) {
  EXPECT_FALSE(NttTables::Create(64, 97).ok());  // 97 != 1 mod 128
  EXPECT_FALSE(NttTables::Create(48, 97).ok());  // not a power of two
}

}  // namespace
}  // namespace hybridfl::he_internal
