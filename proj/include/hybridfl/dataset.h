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

#ifndef HYBRIDFL_DATASET_H_
#define HYBRIDFL_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "absl/types/span.h"

namespace hybridfl {

// Dense labeled samples, features stored row-major.
struct Dataset {
  size_t num_features = 0;
  int num_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;

  size_t size() const { return labels.size(); }
  absl::Span<const double> row(size_t i) const {
    return absl::MakeConstSpan(features).subspan(i * num_features,
                                                 num_features);
  }
};

// Gaussian class clusters. Class means are random directions scaled to
// `separation`; samples add unit-variance noise. Only the first
// `active_features` coordinates carry signal and noise, the rest are fixed
// at zero (like the constant border pixels of an image). 0 means all
// features are active. Labels are balanced to within one sample.
struct SyntheticSpec {
  size_t num_samples = 2000;
  size_t input_dim = 20;
  size_t active_features = 0;
  int num_classes = 4;
  double separation = 2.0;
};

absl::StatusOr<Dataset> MakeSynthetic(const SyntheticSpec& spec, uint64_t seed);

// CSV with a header row. The column named "label" (or the last column when
// none is named so) holds integer labels in [0, num_classes); every other
// column must be numeric.
absl::StatusOr<Dataset> ParseCsv(absl::string_view text, int num_classes);
absl::StatusOr<Dataset> LoadCsv(const std::string& path, int num_classes);

Dataset Subset(const Dataset& data, absl::Span<const size_t> indices);

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

// Seeded shuffle, then the first round(test_fraction * n) samples form the
// test set.
absl::StatusOr<TrainTestSplit> SplitTrainTest(const Dataset& data,
                                              double test_fraction,
                                              uint64_t seed);

enum class PartitionScheme { kIid, kDirichlet };

struct DataPartition {
  PartitionScheme scheme = PartitionScheme::kIid;
  double alpha = 1.0;  // Dirichlet concentration
};

// Disjoint per-client index lists covering `data`. IID gives equal shards
// (sizes differ by at most one). Dirichlet(alpha) draws, for every class,
// client proportions from Dir(alpha * 1_N); draws are repeated (at most 100
// times) until every client holds at least one sample.
absl::StatusOr<std::vector<std::vector<size_t>>> SplitClients(
    const Dataset& data, const DataPartition& partition, size_t num_clients,
    uint64_t seed);

}  // namespace hybridfl

#endif  // HYBRIDFL_DATASET_H_
