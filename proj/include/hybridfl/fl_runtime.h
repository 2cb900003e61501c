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

#ifndef HYBRIDFL_FL_RUNTIME_H_
#define HYBRIDFL_FL_RUNTIME_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "absl/types/span.h"
#include "hybridfl/config.h"
#include "hybridfl/dataset.h"
#include "hybridfl/dp_engine.h"
#include "hybridfl/he_backend.h"
#include "hybridfl/metrics_report.h"
#include "hybridfl/model.h"
#include "hybridfl/partition_voting.h"
#include "hybridfl/vec_core.h"

namespace hybridfl {

struct RatioSchedule {
  enum class Mode { kStatic, kDynamic };

  double r0 = 0.1;
  double lambda = 1.0;
  Mode mode = Mode::kStatic;

  absl::Status Validate() const;
};

// Static: r0. Dynamic: r0 * lambda^t, so round 0 uses r0.
double RatioAt(const RatioSchedule& schedule, int64_t t);

enum class ProtectionKind {
  kNone,                // FedAvg
  kDpOnly,              // clip + noise on the whole update
  kHeOnly,              // encrypt the whole update
  kSerial,              // clip + noise, then encrypt the whole update
  kParallel,            // voted partition: DP on one part, HE on the other
  kAmplitudeVaryingDp,  // DP with sigma_t = sigma_z * scale^t
};

absl::string_view ProtectionKindName(ProtectionKind kind);
absl::StatusOr<ProtectionKind> ParseProtectionKind(absl::string_view name);

struct ProtectionMode {
  ProtectionKind kind = ProtectionKind::kParallel;
  PartitionStrategy strategy = PartitionStrategy::kMaxNorm;
  RatioSchedule schedule;
  double amplitude_scale = 0.9;
};

struct RoundConfig {
  int64_t clients_total = 10;    // N
  int64_t clients_sampled = 10;  // n
  int local_epochs = 3;          // K
  double learning_rate = 0.01;
  size_t batch_size = 32;
  int64_t rounds = 50;           // T

  absl::Status Validate() const;
};

struct DataConfig {
  std::string source = "synthetic";  // or a CSV path
  SyntheticSpec synthetic;
  double test_fraction = 0.2;
  DataPartition partition;
};

struct ExperimentConfig {
  uint64_t seed = 1;
  DataConfig data;
  ModelKind model_kind = ModelKind::kMlp;
  std::vector<size_t> hidden_dims = {64};
  RoundConfig round;
  ProtectionMode protection;
  double theta = 1.0;
  double epsilon = 1.0;
  double delta = 1e-5;
  std::optional<double> sigma_override;
  HeBackendKind he_backend = HeBackendKind::kMock;
  HeParams he;
  HeCostModel he_cost;
  double train_cost_per_param_sample = 1e-8;
  double bound_c1 = 1.0;
  double bound_c2 = 1.0;
  // Flattened source configuration, echoed into the report.
  std::vector<std::pair<std::string, std::string>> echo;
};

// Typed view of a flat config. Errors name the offending key.
absl::StatusOr<ExperimentConfig> BuildExperimentConfig(const Config& config);

// Server-side ordering of one round. Every call out of order fails with
// FailedPrecondition, which aborts the round.
class RoundProtocol {
 public:
  enum class Phase {
    kIdle,
    kCollectingVotes,
    kVotesTallied,
    kCollectingUploads,
    kAggregated,
  };

  void Reset();

  absl::Status Begin(int64_t round, std::vector<uint32_t> cohort);
  absl::Status SubmitVote(const VoteMessage& vote);
  absl::StatusOr<std::vector<VoteToken>> Tally(int64_t k);
  // Parallel protection without voting (fixed masks) skips the vote phase.
  absl::Status SkipVoting();
  absl::Status SubmitUpload(uint32_t client_id, ParamVector dp_part,
                            std::vector<Ciphertext> he_part);

  struct Aggregate {
    ParamVector dp_sum;            // elementwise sum over the cohort
    std::vector<Ciphertext> he_sum;  // homomorphic sum over the cohort
  };
  // Sums in ascending client-id order.
  absl::StatusOr<Aggregate> Finish(const HeBackend& backend);

  Phase phase() const { return phase_; }

 private:
  absl::Status Expect(Phase phase, absl::string_view action) const;
  absl::StatusOr<size_t> CohortSlot(uint32_t client_id) const;

  Phase phase_ = Phase::kIdle;
  int64_t round_ = -1;
  std::vector<uint32_t> cohort_;
  std::vector<std::optional<VoteMessage>> votes_;
  struct Upload {
    ParamVector dp_part;
    std::vector<Ciphertext> he_part;
  };
  std::vector<std::optional<Upload>> uploads_;
};

// One federated experiment: data, clients, keys and the global model.
class Simulation {
 public:
  static absl::StatusOr<std::unique_ptr<Simulation>> Create(
      const ExperimentConfig& config, int workers = 1);

  // Runs round t (0-based) and applies the global update.
  absl::StatusOr<RoundMetrics> RunRound(int64_t t);

  const ParamVector& params() const { return params_; }
  const ModelSpec& model() const { return model_; }
  const Dataset& test_set() const { return test_; }
  size_t dim() const { return params_.size(); }
  double sigma_z() const { return sigma_z_; }
  double sensitivity() const { return sensitivity_; }
  size_t num_clients() const { return clients_.size(); }
  const Dataset& client_data(size_t i) const { return clients_[i]; }
  const HeBackend& backend() const { return *backend_; }

  // Partition mask applied in the last completed round.
  const PartitionMask& last_mask() const { return last_mask_; }
  // Global update applied in the last completed round.
  const ParamVector& last_update() const { return last_update_; }
  // Clients' raw local updates from the last completed round, cohort order.
  const std::vector<ParamVector>& last_client_updates() const {
    return last_client_updates_;
  }
  const std::vector<uint32_t>& last_cohort() const { return last_cohort_; }

 private:
  Simulation() : last_mask_(PartitionMask::None(0)) {}

  ExperimentConfig config_;
  int workers_ = 1;
  ModelSpec model_;
  Dataset test_;
  std::vector<Dataset> clients_;
  ParamVector params_;
  std::unique_ptr<HeBackend> backend_;
  KeyPair keys_;
  double sigma_z_ = 0.0;
  double sensitivity_ = 0.0;
  RoundProtocol protocol_;

  PartitionMask last_mask_;
  ParamVector last_update_;
  std::vector<ParamVector> last_client_updates_;
  std::vector<uint32_t> last_cohort_;
};

// T rounds. A failing round stops the run and yields a report flagged
// incomplete that still holds the completed rounds.
ExperimentReport RunExperiment(const ExperimentConfig& config,
                               int workers = 1);

}  // namespace hybridfl

#endif  // HYBRIDFL_FL_RUNTIME_H_
