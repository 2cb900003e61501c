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

#include "hybridfl/dataset.h"

#include <algorithm>
#include <set>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace hybridfl {
namespace {

using ::testing::HasSubstr;

TEST(SyntheticTest, SizeAndBalancedLabels) {
  auto d = MakeSynthetic({.num_samples = 2000, .input_dim = 20,
                          .num_classes = 4, .separation = 2.0},
                         7);
  ASSERT_TRUE(d.ok());
  EXPECT_EQ(d->size(), 2000u);
  EXPECT_EQ(d->features.size(), 2000u * 20);
  std::vector<int> counts(4, 0);
  for (int y : d->labels) ++counts[y];
  for (int c : counts) EXPECT_NEAR(c, 500, 25);
}

TEST(SyntheticTest, InactiveFeaturesAreZero) {
  auto d = MakeSynthetic({.num_samples = 50, .input_dim = 10,
                          .active_features = 3, .num_classes = 2},
                         1);
  ASSERT_TRUE(d.ok());
  for (size_t i = 0; i < d->size(); ++i) {
    auto row = d->row(i);
    for (size_t j = 3; j < 10; ++j) EXPECT_EQ(row[j], 0.0);
    EXPECT_NE(row[0], 0.0);
  }
}

TEST(SyntheticTest, DeterministicPerSeed) {
  SyntheticSpec spec{.num_samples = 100};
  auto a = MakeSynthetic(spec, 3);
  auto b = MakeSynthetic(spec, 3);
  auto c = MakeSynthetic(spec, 4);
  ASSERT_TRUE(a.ok() && b.ok() && c.ok());
  EXPECT_EQ(a->features, b->features);
  EXPECT_EQ(a->labels, b->labels);
  EXPECT_NE(a->features, c->features);
}

TEST(SyntheticTest, RejectsBadSpec) {
  EXPECT_FALSE(MakeSynthetic({.num_samples = 0}, 1).ok());
  EXPECT_FALSE(MakeSynthetic({.num_classes = 0}, 1).ok());
  EXPECT_FALSE(
      MakeSynthetic({.input_dim = 4, .active_features = 5}, 1).ok());
}

TEST(CsvTest, ParsesHeaderAndRows) {
  auto d = ParseCsv("f0,f1,label\n1,2,0\n3,4,1\n5.5,-6,3\n", 4);
  ASSERT_TRUE(d.ok()) << d.status();
  EXPECT_EQ(d->size(), 3u);
  EXPECT_EQ(d->num_features, 2u);
  EXPECT_EQ(d->labels, (std::vector<int>{0, 1, 3}));
  EXPECT_EQ(d->features, (std::vector<double>{1, 2, 3, 4, 5.5, -6}));
}

TEST(CsvTest, LabelColumnByName) {
  auto d = ParseCsv("label,a,b\n2,0.5,0.25\n", 3);
  ASSERT_TRUE(d.ok());
  EXPECT_EQ(d->labels[0], 2);
  EXPECT_EQ(d->features, (std::vector<double>{0.5, 0.25}));
}

TEST(CsvTest, ErrorsNameTheLine) {
  auto bad_label = ParseCsv("f0,f1,label\n1,2,0\n1,2,9\n", 4);
  ASSERT_FALSE(bad_label.ok());
  EXPECT_THAT(bad_label.status().message(), HasSubstr("line 3"));
  auto bad_number = ParseCsv("f0,label\nx,1\n", 4);
  ASSERT_FALSE(bad_number.ok());
  EXPECT_THAT(bad_number.status().message(), HasSubstr("line 2"));
  auto ragged = ParseCsv("f0,f1,label\n1,0\n", 4);
  ASSERT_FALSE(ragged.ok());
  EXPECT_THAT(ragged.status().message(), HasSubstr("line 2"));
}

TEST(SplitTrainTestTest, DisjointAndSized) {
  auto d = MakeSynthetic({.num_samples = 100, .input_dim = 2}, 1);
  ASSERT_TRUE(d.ok());
  auto s = SplitTrainTest(*d, 0.2, 5);
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(s->test.size(), 20u);
  EXPECT_EQ(s->train.size(), 80u);
  EXPECT_FALSE(SplitTrainTest(*d, 1.0, 5).ok());
}

void ExpectCover(const std::vector<std::vector<size_t>>& shards, size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& s : shards) {
    EXPECT_FALSE(s.empty());
    for (size_t i : s) ++seen[i];
  }
  for (int c : seen) EXPECT_EQ(c, 1);
}

TEST(SplitClientsTest, IidEqualShards) {
  auto d = MakeSynthetic({.num_samples = 2000, .input_dim = 2}, 1);
  ASSERT_TRUE(d.ok());
  auto shards = SplitClients(*d, {}, 10, 3);
  ASSERT_TRUE(shards.ok());
  ASSERT_EQ(shards->size(), 10u);
  for (const auto& s : *shards) EXPECT_EQ(s.size(), 200u);
  ExpectCover(*shards, 2000);
}

TEST(SplitClientsTest, DirichletIsReproducibleAndCovers) {
  auto d = MakeSynthetic({.num_samples = 2000, .input_dim = 2}, 1);
  ASSERT_TRUE(d.ok());
  DataPartition dir{.scheme = PartitionScheme::kDirichlet, .alpha = 0.5};
  auto a = SplitClients(*d, dir, 10, 9);
  auto b = SplitClients(*d, dir, 10, 9);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(*a, *b);
  ExpectCover(*a, 2000);
  // Skewed: some client's label histogram is far from uniform.
  double worst = 0.0;
  for (const auto& s : *a) {
    std::vector<int> h(4, 0);
    for (size_t i : s) ++h[d->labels[i]];
    worst = std::max(worst, *std::max_element(h.begin(), h.end()) /
                                static_cast<double>(s.size()));
  }
  EXPECT_GT(worst, 0.5);
}

TEST(SplitClientsTest, RejectsMoreClientsThanSamples) {
  auto d = MakeSynthetic({.num_samples = 2000, .input_dim = 2}, 1);
  ASSERT_TRUE(d.ok());
  EXPECT_FALSE(SplitClients(*d, {}, 3000, 1).ok());
  EXPECT_FALSE(SplitClients(*d, {}, 0, 1).ok());
}

}  // namespace
}  // namespace hybridfl
