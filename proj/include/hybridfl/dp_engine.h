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

#ifndef HYBRIDFL_DP_ENGINE_H_
#define HYBRIDFL_DP_ENGINE_H_

#include <cstdint>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "hybridfl/vec_core.h"

namespace hybridfl {

// Clipping threshold and per-coordinate Gaussian noise stddev.
struct DpParams {
  double theta = 1.0;
  double sigma_z = 0.0;

  absl::Status Validate() const;
};

// Experiment-wide (epsilon, delta) budget together with the quantities the
// closed-form Gaussian accountant needs.
struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 1e-5;
  double q = 1.0;  // client sampling ratio n / N
  int64_t rounds = 1;
  double theta = 1.0;
  int64_t min_dataset_size = 1;  // min over clients of |D_i|

  absl::Status Validate() const;
};

// u / max{1, ||u||_2 / theta}. Vectors already inside the ball are returned
// unchanged.
absl::StatusOr<ParamVector> Clip(absl::Span<const double> u, double theta);

// u + z with z_i ~ N(0, sigma_z^2) i.i.d. drawn from Rng(seed).
// sigma_z == 0 returns u exactly.
absl::StatusOr<ParamVector> AddNoise(absl::Span<const double> u,
                                     double sigma_z, uint64_t seed);

// Sensitivity of the clipped, dataset-averaged update: 2 theta / min |D_i|.
absl::StatusOr<double> Sensitivity(double theta, int64_t min_dataset_size);

// sigma_z = (sensitivity / epsilon) * sqrt(2 q T ln(1/delta)).
absl::StatusOr<double> SigmaFromBudget(const PrivacyBudget& budget);

// Clip then add noise; applied once per round to the DP part of an update.
absl::StatusOr<ParamVector> ProtectDp(absl::Span<const double> u_dp,
                                      const DpParams& params, uint64_t seed);

}  // namespace hybridfl

#endif  // HYBRIDFL_DP_ENGINE_H_
