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

#include "absl/strings/str_cat.h"
#include "hybridfl/rng.h"
#include "hybridfl/status_macros.h"

namespace hybridfl {

absl::Status DpParams::Validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    return absl::InvalidArgumentError(
        absl::StrCat("clipping threshold must be positive, got ", theta));
  }
  if (!(sigma_z >= 0.0) || !std::isfinite(sigma_z)) {
    return absl::InvalidArgumentError(
        absl::StrCat("noise stddev must be nonnegative, got ", sigma_z));
  }
  return absl::OkStatus();
}

absl::Status PrivacyBudget::Validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", epsilon));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in (0, 1), got ", delta));
  }
  if (!(q > 0.0 && q <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sampling ratio q must lie in (0, 1], got ", q));
  }
  if (rounds < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("rounds must be >= 1, got ", rounds));
  }
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    return absl::InvalidArgumentError(
        absl::StrCat("theta must be positive, got ", theta));
  }
  if (min_dataset_size < 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "minimum client dataset size must be >= 1, got ", min_dataset_size));
  }
  return absl::OkStatus();
}

absl::StatusOr<ParamVector> Clip(absl::Span<const double> u, double theta) {
  if (!(theta > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("clip: theta must be positive, got ", theta));
  }
  RETURN_IF_ERROR(CheckFinite(u, "clip input"));
  const double factor = L2Norm(u) / theta;
  ParamVector out(u.begin(), u.end());
  if (factor <= 1.0) return out;
  for (double& x : out) x /= factor;
  return out;
}

absl::StatusOr<ParamVector> AddNoise(absl::Span<const double> u,
                                     double sigma_z, uint64_t seed) {
  if (!(sigma_z >= 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("add_noise: sigma_z must be >= 0, got ", sigma_z));
  }
  ParamVector out(u.begin(), u.end());
  if (sigma_z == 0.0) return out;
  Rng rng(seed);
  for (double& x : out) x += sigma_z * rng.Gaussian();
  return out;
}

absl::StatusOr<double> Sensitivity(double theta, int64_t min_dataset_size) {
  if (min_dataset_size <= 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "sensitivity: dataset size must be positive, got ", min_dataset_size));
  }
  if (!(theta > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sensitivity: theta must be positive, got ", theta));
  }
  return 2.0 * theta / static_cast<double>(min_dataset_size);
}

absl::StatusOr<double> SigmaFromBudget(const PrivacyBudget& budget) {
  RETURN_IF_ERROR(budget.Validate());
  ASSIGN_OR_RETURN(double delta_f,
                   Sensitivity(budget.theta, budget.min_dataset_size));
  const double log_inv_delta = -std::log(budget.delta);
  return (delta_f / budget.epsilon) *
         std::sqrt(2.0 * budget.q * static_cast<double>(budget.rounds) *
                   log_inv_delta);
}

absl::StatusOr<ParamVector> ProtectDp(absl::Span<const double> u_dp,
                                      const DpParams& params, uint64_t seed) {
  RETURN_IF_ERROR(params.Validate());
  ASSIGN_OR_RETURN(ParamVector clipped, Clip(u_dp, params.theta));
  return AddNoise(clipped, params.sigma_z, seed);
}

}  // namespace hybridfl
