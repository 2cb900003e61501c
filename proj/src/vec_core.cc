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

#include "hybridfl/vec_core.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "hybridfl/status_macros.h"
#include "absl/strings/string_view.h"

namespace hybridfl {

absl::Status CheckFinite(absl::Span<const double> values,
                         absl::string_view what) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      return absl::InvalidArgumentError(absl::StrCat(
          what, " has a non-finite entry at index ", i, ": ", values[i]));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<PartitionMask> PartitionMask::Create(
    std::vector<size_t> he_indices, size_t dim) {
  for (size_t j = 0; j < he_indices.size(); ++j) {
    if (he_indices[j] >= dim) {
      return absl::InvalidArgumentError(absl::StrCat(
          "partition index ", he_indices[j], " out of range for dim ", dim));
    }
    if (j > 0 && he_indices[j] <= he_indices[j - 1]) {
      return absl::InvalidArgumentError(
          "partition indices must be strictly increasing");
    }
  }
  return PartitionMask(std::move(he_indices), dim);
}

PartitionMask PartitionMask::None(size_t dim) { return PartitionMask({}, dim); }

PartitionMask PartitionMask::All(size_t dim) {
  std::vector<size_t> all(dim);
  for (size_t i = 0; i < dim; ++i) all[i] = i;
  return PartitionMask(std::move(all), dim);
}

std::vector<size_t> PartitionMask::DpIndices() const {
  std::vector<size_t> out;
  out.reserve(dp_count());
  size_t next = 0;
  for (size_t i = 0; i < dim_; ++i) {
    if (next < he_indices_.size() && he_indices_[next] == i) {
      ++next;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

absl::StatusOr<UpdateSplit> Split(absl::Span<const double> u,
                                  const PartitionMask& mask) {
  if (u.size() != mask.dim()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "split: vector dim ", u.size(), " != mask dim ", mask.dim()));
  }
  RETURN_IF_ERROR(CheckFinite(u, "split input"));
  UpdateSplit out{.mask = mask};
  out.he_part.reserve(mask.he_count());
  out.dp_part.reserve(mask.dp_count());
  auto he = mask.he_indices();
  size_t next = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    if (next < he.size() && he[next] == i) {
      out.he_part.push_back(u[i]);
      ++next;
    } else {
      out.dp_part.push_back(u[i]);
    }
  }
  return out;
}

absl::StatusOr<ParamVector> Merge(absl::Span<const double> dp_part,
                                  absl::Span<const double> he_part,
                                  const PartitionMask& mask) {
  if (he_part.size() != mask.he_count() || dp_part.size() != mask.dp_count()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "merge: parts of length ", dp_part.size(), " + ", he_part.size(),
        " inconsistent with mask (", mask.dp_count(), " + ", mask.he_count(),
        ")"));
  }
  ParamVector out(mask.dim());
  auto he = mask.he_indices();
  size_t next_he = 0;
  size_t next_dp = 0;
  for (size_t i = 0; i < out.size(); ++i) {
    if (next_he < he.size() && he[next_he] == i) {
      out[i] = he_part[next_he++];
    } else {
      out[i] = dp_part[next_dp++];
    }
  }
  return out;
}

double L2Norm(absl::Span<const double> u) {
  double sum = 0.0;
  for (double x : u) sum += x * x;
  return std::sqrt(sum);
}

absl::StatusOr<ParamVector> AddScaled(absl::Span<const double> a,
                                      absl::Span<const double> b,
                                      double scale) {
  if (a.size() != b.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "add_scaled: dimension mismatch ", a.size(), " vs ", b.size()));
  }
  ParamVector out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + scale * b[i];
  return out;
}

}  // namespace hybridfl
