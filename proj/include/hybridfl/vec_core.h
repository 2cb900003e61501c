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

#ifndef HYBRIDFL_VEC_CORE_H_
#define HYBRIDFL_VEC_CORE_H_

#include <cstddef>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "absl/types/span.h"

namespace hybridfl {

// A flat model parameter (or update) vector. All layers of a model are
// concatenated into one vector; layer structure lives in the model code only.
using ParamVector = std::vector<double>;

// Returns InvalidArgument naming `what` if any entry is NaN or infinite.
absl::Status CheckFinite(absl::Span<const double> values,
                         absl::string_view what = "vector");

// The set of coordinates protected by homomorphic encryption. Every other
// coordinate of a vector of length dim() belongs to the DP part.
class PartitionMask {
 public:
  // `he_indices` must be strictly increasing and lie in [0, dim).
  static absl::StatusOr<PartitionMask> Create(std::vector<size_t> he_indices,
                                              size_t dim);
  static PartitionMask None(size_t dim);
  static PartitionMask All(size_t dim);

  size_t dim() const { return dim_; }
  absl::Span<const size_t> he_indices() const { return he_indices_; }
  size_t he_count() const { return he_indices_.size(); }
  size_t dp_count() const { return dim_ - he_indices_.size(); }

  // Complement of he_indices(), ascending.
  std::vector<size_t> DpIndices() const;

  friend bool operator==(const PartitionMask&, const PartitionMask&) = default;

 private:
  PartitionMask(std::vector<size_t> he_indices, size_t dim)
      : he_indices_(std::move(he_indices)), dim_(dim) {}

  std::vector<size_t> he_indices_;
  size_t dim_ = 0;
};

struct UpdateSplit {
  ParamVector dp_part;
  ParamVector he_part;
  PartitionMask mask;
};

// he_part[j] = u[mask.he_indices()[j]]; dp_part holds the remaining
// coordinates in ascending index order.
absl::StatusOr<UpdateSplit> Split(absl::Span<const double> u,
                                  const PartitionMask& mask);

// Inverse of Split. Reproduces the original vector bit-for-bit.
absl::StatusOr<ParamVector> Merge(absl::Span<const double> dp_part,
                                  absl::Span<const double> he_part,
                                  const PartitionMask& mask);

double L2Norm(absl::Span<const double> u);

// Elementwise a + scale * b.
absl::StatusOr<ParamVector> AddScaled(absl::Span<const double> a,
                                      absl::Span<const double> b,
                                      double scale);

}  // namespace hybridfl

#endif  // HYBRIDFL_VEC_CORE_H_
