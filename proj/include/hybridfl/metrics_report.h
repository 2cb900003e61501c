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

#ifndef HYBRIDFL_METRICS_REPORT_H_
#define HYBRIDFL_METRICS_REPORT_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "absl/types/span.h"
#include "hybridfl/dataset.h"
#include "hybridfl/model.h"

namespace hybridfl {

struct RoundMetrics {
  int64_t round = 0;
  double r_t = 0.0;
  int64_t he_count = 0;  // size of the HE part this round
  double accuracy = 0.0;
  double sim_time_s = 0.0;
  double wall_time_s = 0.0;

  friend bool operator==(const RoundMetrics&, const RoundMetrics&) = default;
};

struct ExperimentReport {
  bool complete = true;
  std::string error;
  // Flattened effective configuration, sorted by key.
  std::vector<std::pair<std::string, std::string>> config;
  std::string he_backend;
  std::vector<std::string> notes;
  int64_t dim = 0;
  double sensitivity = 0.0;
  double sigma_z = 0.0;
  std::vector<RoundMetrics> rounds;
  double final_accuracy = 0.0;
  double total_sim_time_s = 0.0;
  double total_wall_time_s = 0.0;
  double efficiency_ratio = 0.0;
  double theorem_bound = 0.0;

  friend bool operator==(const ExperimentReport&,
                         const ExperimentReport&) = default;
};

// Fraction of samples whose predicted class equals the label.
absl::StatusOr<double> Accuracy(const ModelSpec& spec,
                                absl::Span<const double> params,
                                const Dataset& test);

// (accuracy_pct / time_s) * 100.
absl::StatusOr<double> EfficiencyRatio(double accuracy_pct, double time_s);

struct BoundInputs {
  double c1 = 1.0;
  double c2 = 1.0;
  double r = 0.0;
  double epsilon = 1.0;
  double delta = 1e-5;
  int64_t num_clients = 1;
  int64_t rounds = 1;
};

// Qualitative convergence diagnostic, not a certified bound:
//   c1 (1 - r) + c2 (1 - r) ln(1/delta) / (N^2 eps^2) + 1/T,
// where the O(1/T) optimisation term is taken with unit constant.
double TheoremBound(const BoundInputs& in);

// report.json: stable key order, 2-space indent, trailing newline. Wall-clock
// times are left out so that equal runs produce identical bytes.
std::string EmitJson(const ExperimentReport& report);
absl::StatusOr<ExperimentReport> ParseReportJson(absl::string_view json);

// rounds.csv with header round,r_t,accuracy,sim_time_s,wall_time_s.
std::string EmitCsv(const ExperimentReport& report);

// Writes to a sibling temporary file, then renames over `path`.
absl::Status WriteFileAtomic(const std::string& path, absl::string_view data);
absl::StatusOr<std::string> ReadFile(const std::string& path);

}  // namespace hybridfl

#endif  // HYBRIDFL_METRICS_REPORT_H_
