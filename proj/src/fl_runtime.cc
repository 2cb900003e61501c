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

#include "hybridfl/fl_runtime.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <thread>
#include <utility>

#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"
#include "hybridfl/rng.h"
#include "hybridfl/status_macros.h"

namespace hybridfl {

absl::Status RatioSchedule::Validate() const {
  if (!(r0 >= 0.0 && r0 <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("schedule r0 must lie in [0, 1], got ", r0));
  }
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("schedule lambda must lie in (0, 1], got ", lambda));
  }
  return absl::OkStatus();
}

double RatioAt(const RatioSchedule& schedule, int64_t t) {
  if (schedule.mode == RatioSchedule::Mode::kStatic || t <= 0) {
    return schedule.r0;
  }
  return schedule.r0 * std::pow(schedule.lambda, static_cast<double>(t));
}

absl::string_view ProtectionKindName(ProtectionKind kind) {
  switch (kind) {
    case ProtectionKind::kNone:
      return "none";
    case ProtectionKind::kDpOnly:
      return "dp_only";
    case ProtectionKind::kHeOnly:
      return "he_only";
    case ProtectionKind::kSerial:
      return "serial";
    case ProtectionKind::kParallel:
      return "parallel";
    case ProtectionKind::kAmplitudeVaryingDp:
      return "amplitude_dp";
  }
  return "unknown";
}

absl::StatusOr<ProtectionKind> ParseProtectionKind(absl::string_view name) {
  for (ProtectionKind k :
       {ProtectionKind::kNone, ProtectionKind::kDpOnly, ProtectionKind::kHeOnly,
        ProtectionKind::kSerial, ProtectionKind::kParallel,
        ProtectionKind::kAmplitudeVaryingDp}) {
    if (name == ProtectionKindName(k)) return k;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown protection kind '", name, "'"));
}

absl::Status RoundConfig::Validate() const {
  if (clients_total < 1) {
    return absl::InvalidArgumentError("need at least one client");
  }
  if (clients_sampled < 1 || clients_sampled > clients_total) {
    return absl::InvalidArgumentError(
        absl::StrCat("sampled clients must lie in [1, ", clients_total,
                     "], got ", clients_sampled));
  }
  if (local_epochs < 1) {
    return absl::InvalidArgumentError("local epochs must be >= 1");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    return absl::InvalidArgumentError("learning rate must be positive");
  }
  if (batch_size < 1) {
    return absl::InvalidArgumentError("batch size must be >= 1");
  }
  if (rounds < 1) return absl::InvalidArgumentError("rounds must be >= 1");
  return absl::OkStatus();
}

namespace {

// Prefixes a status message with the config key it came from.
absl::Status KeyError(absl::string_view key, const absl::Status& s) {
  absl::string_view msg = s.message();
  if (absl::StrContains(msg, key)) return s;
  return absl::Status(s.code(),
                      absl::StrCat("config key '", key, "': ", msg));
}

}  // namespace

absl::StatusOr<ExperimentConfig> BuildExperimentConfig(const Config& config) {
  ExperimentConfig c;
  c.echo = config.Effective();

  auto get_int = [&](absl::string_view key,
                     int64_t min_value) -> absl::StatusOr<int64_t> {
    ASSIGN_OR_RETURN(int64_t v, config.GetInt(key));
    if (v < min_value) {
      return absl::InvalidArgumentError(absl::StrCat(
          "config key '", key, "': must be >= ", min_value, ", got ", v));
    }
    return v;
  };
  auto get_double = [&](absl::string_view key) { return config.GetDouble(key); };

  ASSIGN_OR_RETURN(int64_t seed, get_int("seed", 0));
  c.seed = static_cast<uint64_t>(seed);

  c.data.source = config.GetString("dataset.source");
  ASSIGN_OR_RETURN(int64_t num_samples, get_int("dataset.num_samples", 1));
  ASSIGN_OR_RETURN(int64_t input_dim, get_int("dataset.input_dim", 1));
  ASSIGN_OR_RETURN(int64_t active, get_int("dataset.active_features", 0));
  ASSIGN_OR_RETURN(int64_t classes, get_int("dataset.num_classes", 1));
  ASSIGN_OR_RETURN(c.data.synthetic.separation,
                   get_double("dataset.separation"));
  c.data.synthetic.num_samples = static_cast<size_t>(num_samples);
  c.data.synthetic.input_dim = static_cast<size_t>(input_dim);
  c.data.synthetic.active_features = static_cast<size_t>(active);
  c.data.synthetic.num_classes = static_cast<int>(classes);
  ASSIGN_OR_RETURN(c.data.test_fraction, get_double("dataset.test_fraction"));
  if (!(c.data.test_fraction > 0.0 && c.data.test_fraction < 1.0)) {
    return absl::InvalidArgumentError(
        "config key 'dataset.test_fraction': must lie in (0, 1)");
  }
  const std::string partition = config.GetString("dataset.partition");
  if (partition == "iid") {
    c.data.partition.scheme = PartitionScheme::kIid;
  } else if (partition == "dirichlet") {
    c.data.partition.scheme = PartitionScheme::kDirichlet;
  } else {
    return absl::InvalidArgumentError(absl::StrCat(
        "config key 'dataset.partition': unknown scheme '", partition, "'"));
  }
  ASSIGN_OR_RETURN(c.data.partition.alpha, get_double("dataset.alpha"));
  if (!(c.data.partition.alpha > 0.0)) {
    return absl::InvalidArgumentError(
        "config key 'dataset.alpha': must be positive");
  }

  {
    auto kind = ParseModelKind(config.GetString("model.kind"));
    if (!kind.ok()) return KeyError("model.kind", kind.status());
    c.model_kind = *kind;
  }
  c.hidden_dims.clear();
  for (absl::string_view part :
       absl::StrSplit(config.GetString("model.hidden"), ',',
                      absl::SkipWhitespace())) {
    size_t width = 0;
    if (!absl::SimpleAtoi(absl::StripAsciiWhitespace(part), &width) ||
        width == 0) {
      return absl::InvalidArgumentError(absl::StrCat(
          "config key 'model.hidden': bad layer width '", part, "'"));
    }
    c.hidden_dims.push_back(width);
  }

  ASSIGN_OR_RETURN(c.round.clients_total, get_int("round.clients_total_N", 1));
  ASSIGN_OR_RETURN(c.round.clients_sampled,
                   get_int("round.clients_sampled_n", 1));
  if (c.round.clients_sampled > c.round.clients_total) {
    return absl::InvalidArgumentError(
        "config key 'round.clients_sampled_n': exceeds round.clients_total_N");
  }
  ASSIGN_OR_RETURN(int64_t epochs, get_int("round.local_epochs_K", 1));
  c.round.local_epochs = static_cast<int>(epochs);
  ASSIGN_OR_RETURN(c.round.learning_rate, get_double("round.learning_rate"));
  if (!(c.round.learning_rate > 0.0)) {
    return absl::InvalidArgumentError(
        "config key 'round.learning_rate': must be positive");
  }
  ASSIGN_OR_RETURN(int64_t batch, get_int("round.batch_size", 1));
  c.round.batch_size = static_cast<size_t>(batch);
  ASSIGN_OR_RETURN(c.round.rounds, get_int("round.rounds_T", 1));
  ASSIGN_OR_RETURN(c.train_cost_per_param_sample,
                   get_double("round.train_cost_per_param_sample"));
  if (c.train_cost_per_param_sample < 0.0) {
    return absl::InvalidArgumentError(
        "config key 'round.train_cost_per_param_sample': must be >= 0");
  }

  {
    auto kind = ParseProtectionKind(config.GetString("protection.kind"));
    if (!kind.ok()) return KeyError("protection.kind", kind.status());
    c.protection.kind = *kind;
    auto strategy =
        ParsePartitionStrategy(config.GetString("protection.strategy"));
    if (!strategy.ok()) {
      return KeyError("protection.strategy", strategy.status());
    }
    c.protection.strategy = *strategy;
  }
  ASSIGN_OR_RETURN(c.protection.amplitude_scale,
                   get_double("protection.amplitude_scale"));
  if (!(c.protection.amplitude_scale > 0.0 &&
        c.protection.amplitude_scale <= 1.0)) {
    return absl::InvalidArgumentError(
        "config key 'protection.amplitude_scale': must lie in (0, 1]");
  }
  ASSIGN_OR_RETURN(c.bound_c1, get_double("protection.bound_c1"));
  ASSIGN_OR_RETURN(c.bound_c2, get_double("protection.bound_c2"));
  if (c.bound_c1 < 0.0 || c.bound_c2 < 0.0) {
    return absl::InvalidArgumentError(
        "config key 'protection.bound_c1': bound constants must be >= 0");
  }

  const std::string mode = config.GetString("schedule.mode");
  if (mode == "static") {
    c.protection.schedule.mode = RatioSchedule::Mode::kStatic;
  } else if (mode == "dynamic") {
    c.protection.schedule.mode = RatioSchedule::Mode::kDynamic;
  } else {
    return absl::InvalidArgumentError(absl::StrCat(
        "config key 'schedule.mode': unknown mode '", mode, "'"));
  }
  ASSIGN_OR_RETURN(c.protection.schedule.r0, get_double("schedule.r0"));
  ASSIGN_OR_RETURN(c.protection.schedule.lambda,
                   get_double("schedule.lambda"));
  if (absl::Status s = c.protection.schedule.Validate(); !s.ok()) {
    return KeyError(c.protection.schedule.r0 >= 0.0 &&
                            c.protection.schedule.r0 <= 1.0
                        ? "schedule.lambda"
                        : "schedule.r0",
                    s);
  }

  ASSIGN_OR_RETURN(c.theta, get_double("dp.theta"));
  ASSIGN_OR_RETURN(c.epsilon, get_double("dp.epsilon"));
  ASSIGN_OR_RETURN(c.delta, get_double("dp.delta"));
  if (!(c.theta > 0.0)) {
    return absl::InvalidArgumentError("config key 'dp.theta': must be > 0");
  }
  if (!(c.epsilon > 0.0)) {
    return absl::InvalidArgumentError("config key 'dp.epsilon': must be > 0");
  }
  if (!(c.delta > 0.0 && c.delta < 1.0)) {
    return absl::InvalidArgumentError(
        "config key 'dp.delta': must lie in (0, 1)");
  }
  if (!config.GetString("dp.sigma_z").empty()) {
    ASSIGN_OR_RETURN(double sigma, get_double("dp.sigma_z"));
    if (sigma < 0.0) {
      return absl::InvalidArgumentError(
          "config key 'dp.sigma_z': must be >= 0");
    }
    c.sigma_override = sigma;
  }

  {
    auto kind = ParseHeBackendKind(config.GetString("he.backend"));
    if (!kind.ok()) return KeyError("he.backend", kind.status());
    c.he_backend = *kind;
  }
  ASSIGN_OR_RETURN(int64_t ring, get_int("he.ring_degree", 1));
  ASSIGN_OR_RETURN(int64_t scale, get_int("he.scale_bits", 1));
  ASSIGN_OR_RETURN(int64_t mbits, get_int("he.modulus_bits", 1));
  ASSIGN_OR_RETURN(int64_t max_add, get_int("he.max_additions", 1));
  c.he.ring_degree = static_cast<int>(ring);
  c.he.scale_bits = static_cast<int>(scale);
  c.he.modulus_bits = static_cast<int>(mbits);
  c.he.max_additions = static_cast<int>(max_add);
  if (absl::Status s = c.he.Validate(); !s.ok()) {
    return KeyError("he.ring_degree", s);
  }
  ASSIGN_OR_RETURN(c.he_cost.per_slot_seconds,
                   get_double("he.per_slot_seconds"));
  ASSIGN_OR_RETURN(c.he_cost.per_op_seconds, get_double("he.per_op_seconds"));
  if (c.he_cost.per_slot_seconds < 0.0 || c.he_cost.per_op_seconds < 0.0) {
    return absl::InvalidArgumentError(
        "config key 'he.per_slot_seconds': costs must be >= 0");
  }
  return c;
}

// --- RoundProtocol ---------------------------------------------------------

namespace {

absl::string_view PhaseName(RoundProtocol::Phase phase) {
  switch (phase) {
    case RoundProtocol::Phase::kIdle:
      return "idle";
    case RoundProtocol::Phase::kCollectingVotes:
      return "collecting votes";
    case RoundProtocol::Phase::kVotesTallied:
      return "votes tallied";
    case RoundProtocol::Phase::kCollectingUploads:
      return "collecting uploads";
    case RoundProtocol::Phase::kAggregated:
      return "aggregated";
  }
  return "unknown";
}

}  // namespace

void RoundProtocol::Reset() {
  phase_ = Phase::kIdle;
  round_ = -1;
  cohort_.clear();
  votes_.clear();
  uploads_.clear();
}

absl::Status RoundProtocol::Expect(Phase phase, absl::string_view action) const {
  if (phase_ == phase) return absl::OkStatus();
  return absl::FailedPreconditionError(
      absl::StrCat("protocol error: cannot ", action, " while ",
                   PhaseName(phase_), " (round ", round_, ")"));
}

absl::StatusOr<size_t> RoundProtocol::CohortSlot(uint32_t client_id) const {
  auto it = std::lower_bound(cohort_.begin(), cohort_.end(), client_id);
  if (it == cohort_.end() || *it != client_id) {
    return absl::FailedPreconditionError(absl::StrCat(
        "protocol error: client ", client_id, " is not in round ", round_,
        "'s cohort"));
  }
  return static_cast<size_t>(it - cohort_.begin());
}

absl::Status RoundProtocol::Begin(int64_t round, std::vector<uint32_t> cohort) {
  if (phase_ != Phase::kIdle && phase_ != Phase::kAggregated) {
    return Expect(Phase::kIdle, "begin a round");
  }
  if (round <= round_) {
    return absl::FailedPreconditionError(absl::StrCat(
        "protocol error: round ", round, " does not follow round ", round_));
  }
  if (cohort.empty()) {
    return absl::InvalidArgumentError("empty cohort");
  }
  std::sort(cohort.begin(), cohort.end());
  if (std::adjacent_find(cohort.begin(), cohort.end()) != cohort.end()) {
    return absl::InvalidArgumentError("cohort lists a client twice");
  }
  round_ = round;
  cohort_ = std::move(cohort);
  votes_.assign(cohort_.size(), std::nullopt);
  uploads_.assign(cohort_.size(), std::nullopt);
  phase_ = Phase::kCollectingVotes;
  return absl::OkStatus();
}

absl::Status RoundProtocol::SubmitVote(const VoteMessage& vote) {
  RETURN_IF_ERROR(Expect(Phase::kCollectingVotes, "accept a vote"));
  ASSIGN_OR_RETURN(size_t slot, CohortSlot(vote.client_id));
  if (votes_[slot].has_value()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "protocol error: client ", vote.client_id, " voted twice"));
  }
  votes_[slot] = vote;
  return absl::OkStatus();
}

absl::StatusOr<std::vector<VoteToken>> RoundProtocol::Tally(int64_t k) {
  RETURN_IF_ERROR(Expect(Phase::kCollectingVotes, "tally"));
  std::vector<VoteMessage> messages;
  messages.reserve(votes_.size());
  for (size_t i = 0; i < votes_.size(); ++i) {
    if (!votes_[i].has_value()) {
      return absl::FailedPreconditionError(absl::StrCat(
          "protocol error: client ", cohort_[i], " has not voted"));
    }
    messages.push_back(*votes_[i]);
  }
  ASSIGN_OR_RETURN(std::vector<VoteToken> winners, TallyVotes(messages, k));
  phase_ = Phase::kVotesTallied;
  return winners;
}

absl::Status RoundProtocol::SkipVoting() {
  RETURN_IF_ERROR(Expect(Phase::kCollectingVotes, "skip voting"));
  phase_ = Phase::kVotesTallied;
  return absl::OkStatus();
}

absl::Status RoundProtocol::SubmitUpload(uint32_t client_id,
                                         ParamVector dp_part,
                                         std::vector<Ciphertext> he_part) {
  if (phase_ == Phase::kVotesTallied) phase_ = Phase::kCollectingUploads;
  RETURN_IF_ERROR(Expect(Phase::kCollectingUploads, "accept an upload"));
  ASSIGN_OR_RETURN(size_t slot, CohortSlot(client_id));
  if (uploads_[slot].has_value()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "protocol error: client ", client_id, " uploaded twice"));
  }
  uploads_[slot] = Upload{std::move(dp_part), std::move(he_part)};
  return absl::OkStatus();
}

absl::StatusOr<RoundProtocol::Aggregate> RoundProtocol::Finish(
    const HeBackend& backend) {
  RETURN_IF_ERROR(Expect(Phase::kCollectingUploads, "aggregate"));
  for (size_t i = 0; i < uploads_.size(); ++i) {
    if (!uploads_[i].has_value()) {
      return absl::FailedPreconditionError(absl::StrCat(
          "protocol error: client ", cohort_[i], " has not uploaded"));
    }
  }
  Aggregate agg;
  agg.dp_sum = uploads_[0]->dp_part;
  agg.he_sum = uploads_[0]->he_part;
  for (size_t i = 1; i < uploads_.size(); ++i) {
    const Upload& up = *uploads_[i];
    if (up.dp_part.size() != agg.dp_sum.size() ||
        up.he_part.size() != agg.he_sum.size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "client ", cohort_[i], " uploaded a differently shaped update"));
    }
    for (size_t j = 0; j < agg.dp_sum.size(); ++j) {
      agg.dp_sum[j] += up.dp_part[j];
    }
    if (!agg.he_sum.empty()) {
      ASSIGN_OR_RETURN(agg.he_sum, backend.AddVectors(agg.he_sum, up.he_part));
    }
  }
  uploads_.assign(uploads_.size(), std::nullopt);
  phase_ = Phase::kAggregated;
  return agg;
}

// --- Simulation ------------------------------------------------------------

namespace {

// Runs fn(0..n-1) on up to `workers` threads. Returns the error of the lowest
// failing index, so the outcome does not depend on scheduling.
absl::Status ParallelFor(size_t n, int workers,
                         const std::function<absl::Status(size_t)>& fn) {
  std::vector<absl::Status> results(n);
  const size_t threads =
      std::min(n, static_cast<size_t>(std::max(workers, 1)));
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i) results[i] = fn(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (size_t i = w; i < n; i += threads) results[i] = fn(i);
      });
    }
    for (std::thread& t : pool) t.join();
  }
  for (absl::Status& s : results) {
    if (!s.ok()) return s;
  }
  return absl::OkStatus();
}

bool UsesDp(ProtectionKind kind) {
  return kind == ProtectionKind::kDpOnly || kind == ProtectionKind::kSerial ||
         kind == ProtectionKind::kParallel ||
         kind == ProtectionKind::kAmplitudeVaryingDp;
}

// HE ratio used by the bound for the non-scheduled modes.
double BoundRatio(const ExperimentConfig& c) {
  switch (c.protection.kind) {
    case ProtectionKind::kNone:
    case ProtectionKind::kHeOnly:
      return 1.0;
    case ProtectionKind::kParallel:
      return c.protection.schedule.r0;
    default:
      return 0.0;
  }
}

}  // namespace

absl::StatusOr<std::unique_ptr<Simulation>> Simulation::Create(
    const ExperimentConfig& config, int workers) {
  RETURN_IF_ERROR(config.round.Validate());
  RETURN_IF_ERROR(config.protection.schedule.Validate());
  auto sim = std::unique_ptr<Simulation>(new Simulation());
  sim->config_ = config;
  sim->workers_ = std::max(workers, 1);

  Dataset data;
  if (config.data.source == "synthetic") {
    ASSIGN_OR_RETURN(data, MakeSynthetic(config.data.synthetic,
                                         DeriveSeed(config.seed,
                                                    StreamTag::kData)));
  } else {
    ASSIGN_OR_RETURN(data, LoadCsv(config.data.source,
                                   config.data.synthetic.num_classes));
  }
  ASSIGN_OR_RETURN(TrainTestSplit split,
                   SplitTrainTest(data, config.data.test_fraction,
                                  DeriveSeed(config.seed,
                                             StreamTag::kTestSplit)));
  sim->test_ = std::move(split.test);
  ASSIGN_OR_RETURN(
      auto shards,
      SplitClients(split.train, config.data.partition,
                   static_cast<size_t>(config.round.clients_total),
                   DeriveSeed(config.seed, StreamTag::kClientSplit)));
  int64_t min_size = static_cast<int64_t>(split.train.size());
  for (const auto& shard : shards) {
    sim->clients_.push_back(Subset(split.train, shard));
    min_size = std::min(min_size, static_cast<int64_t>(shard.size()));
  }

  sim->model_ = ModelSpec{
      .kind = config.model_kind,
      .input_dim = data.num_features,
      .hidden_dims = config.model_kind == ModelKind::kMlp
                         ? config.hidden_dims
                         : std::vector<size_t>{},
      .num_classes = static_cast<size_t>(data.num_classes)};
  RETURN_IF_ERROR(sim->model_.Validate());
  sim->params_ =
      InitParams(sim->model_, DeriveSeed(config.seed, StreamTag::kModelInit));
  sim->last_mask_ = PartitionMask::None(sim->params_.size());

  ASSIGN_OR_RETURN(sim->backend_, MakeHeBackend(config.he_backend, config.he));
  ASSIGN_OR_RETURN(sim->keys_, sim->backend_->KeyGen(DeriveSeed(
                                   config.seed, StreamTag::kHeKeygen)));

  ASSIGN_OR_RETURN(sim->sensitivity_, Sensitivity(config.theta, min_size));
  if (config.sigma_override.has_value()) {
    sim->sigma_z_ = *config.sigma_override;
  } else {
    PrivacyBudget budget{
        .epsilon = config.epsilon,
        .delta = config.delta,
        .q = static_cast<double>(config.round.clients_sampled) /
             static_cast<double>(config.round.clients_total),
        .rounds = config.round.rounds,
        .theta = config.theta,
        .min_dataset_size = min_size};
    ASSIGN_OR_RETURN(sim->sigma_z_, SigmaFromBudget(budget));
  }
  return sim;
}

absl::StatusOr<RoundMetrics> Simulation::RunRound(int64_t t) {
  const auto wall_start = std::chrono::steady_clock::now();
  const ExperimentConfig& c = config_;
  const ProtectionKind kind = c.protection.kind;
  const size_t dim = params_.size();
  const size_t n = static_cast<size_t>(c.round.clients_sampled);

  double r_t = 0.0;
  switch (kind) {
    case ProtectionKind::kParallel:
      r_t = RatioAt(c.protection.schedule, t);
      break;
    case ProtectionKind::kHeOnly:
    case ProtectionKind::kSerial:
      r_t = 1.0;
      break;
    default:
      break;
  }

  // (1) Cohort.
  Rng sampler(DeriveSeed(c.seed, StreamTag::kClientSample,
                         {static_cast<uint64_t>(t)}));
  std::vector<uint32_t> cohort;
  for (size_t i :
       sampler.SampleWithoutReplacement(clients_.size(), n)) {
    cohort.push_back(static_cast<uint32_t>(i));
  }
  std::sort(cohort.begin(), cohort.end());
  protocol_.Reset();
  RETURN_IF_ERROR(protocol_.Begin(t, cohort));

  // (2) Local training.
  std::vector<ParamVector> updates(n);
  const TrainOptions options{.epochs = c.round.local_epochs,
                             .learning_rate = c.round.learning_rate,
                             .batch_size = c.round.batch_size};
  RETURN_IF_ERROR(ParallelFor(n, workers_, [&](size_t i) -> absl::Status {
    const uint32_t id = cohort[i];
    ASSIGN_OR_RETURN(
        LocalTrainResult res,
        LocalTrain(model_, params_, clients_[id], options,
                   DeriveSeed(c.seed, StreamTag::kLocalTrain,
                              {static_cast<uint64_t>(t), id})));
    updates[i] = std::move(res.update);
    return absl::OkStatus();
  }));

  // (3)-(4) Partition consensus.
  PartitionMask mask = PartitionMask::None(dim);
  if (kind == ProtectionKind::kParallel) {
    const VoteKey key = VoteKey::Derive(
        DeriveSeed(c.seed, StreamTag::kVoteKey), static_cast<uint64_t>(t));
    std::vector<VoteMessage> votes(n);
    RETURN_IF_ERROR(ParallelFor(n, workers_, [&](size_t i) -> absl::Status {
      ASSIGN_OR_RETURN(
          PartitionMask proposal,
          ProposePartition(updates[i], r_t, c.protection.strategy,
                           DeriveSeed(c.seed, StreamTag::kPartition,
                                      {static_cast<uint64_t>(t), cohort[i]})));
      ASSIGN_OR_RETURN(votes[i], EncryptIndices(proposal, key, cohort[i]));
      return absl::OkStatus();
    }));
    for (const VoteMessage& vote : votes) {
      RETURN_IF_ERROR(protocol_.SubmitVote(vote));
    }
    const size_t k = TargetCount(r_t, dim);
    ASSIGN_OR_RETURN(std::vector<VoteToken> winners,
                     protocol_.Tally(static_cast<int64_t>(k)));
    ASSIGN_OR_RETURN(mask, DecodePartition(winners, key, dim, k));
  } else {
    RETURN_IF_ERROR(protocol_.SkipVoting());
    if (kind == ProtectionKind::kHeOnly || kind == ProtectionKind::kSerial) {
      mask = PartitionMask::All(dim);
    }
  }

  // (5) Client-side protection.
  double sigma_t = sigma_z_;
  if (kind == ProtectionKind::kAmplitudeVaryingDp) {
    sigma_t = sigma_z_ *
              std::pow(c.protection.amplitude_scale, static_cast<double>(t));
  }
  const DpParams dp{.theta = c.theta, .sigma_z = sigma_t};
  std::vector<ParamVector> dp_parts(n);
  std::vector<std::vector<Ciphertext>> he_parts(n);
  RETURN_IF_ERROR(ParallelFor(n, workers_, [&](size_t i) -> absl::Status {
    const uint64_t dp_seed = DeriveSeed(c.seed, StreamTag::kDpNoise,
                                        {static_cast<uint64_t>(t), cohort[i]});
    absl::Span<const double> u = updates[i];
    ParamVector noised;
    if (kind == ProtectionKind::kSerial) {
      ASSIGN_OR_RETURN(noised, ProtectDp(u, dp, dp_seed));
      u = noised;
    }
    ASSIGN_OR_RETURN(UpdateSplit split, Split(u, mask));
    if (UsesDp(kind) && kind != ProtectionKind::kSerial) {
      ASSIGN_OR_RETURN(dp_parts[i], ProtectDp(split.dp_part, dp, dp_seed));
    } else {
      dp_parts[i] = std::move(split.dp_part);
    }
    if (!split.he_part.empty()) {
      ASSIGN_OR_RETURN(
          he_parts[i],
          backend_->Encrypt(keys_.public_key, split.he_part,
                            DeriveSeed(c.seed, StreamTag::kHeEncrypt,
                                       {static_cast<uint64_t>(t), cohort[i]})));
    }
    return absl::OkStatus();
  }));
  for (size_t i = 0; i < n; ++i) {
    RETURN_IF_ERROR(protocol_.SubmitUpload(cohort[i], std::move(dp_parts[i]),
                                           std::move(he_parts[i])));
  }

  // (6) Server aggregation; (7) decryption, 1/n scaling, merge, step.
  ASSIGN_OR_RETURN(RoundProtocol::Aggregate agg, protocol_.Finish(*backend_));
  ParamVector he_mean;
  if (mask.he_count() > 0) {
    ASSIGN_OR_RETURN(he_mean, backend_->Decrypt(keys_.secret_key, agg.he_sum,
                                                mask.he_count()));
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& v : he_mean) v *= inv_n;
  for (double& v : agg.dp_sum) v *= inv_n;
  ASSIGN_OR_RETURN(ParamVector update, Merge(agg.dp_sum, he_mean, mask));
  if (absl::Status s = CheckFinite(update, "global update"); !s.ok()) {
    return absl::InternalError(
        absl::StrCat("round ", t, " diverged: ", s.message()));
  }
  ASSIGN_OR_RETURN(params_, AddScaled(params_, update, 1.0));

  ASSIGN_OR_RETURN(double accuracy, Accuracy(model_, params_, test_));
  if (std::isnan(accuracy)) {
    return absl::InternalError(absl::StrCat("round ", t, ": accuracy is NaN"));
  }

  double sample_epochs = 0.0;
  for (uint32_t id : cohort) {
    sample_epochs += static_cast<double>(clients_[id].size());
  }
  sample_epochs *= c.round.local_epochs;
  const double sim_time =
      SimulatedRoundCost(c.he_cost, static_cast<int64_t>(n),
                         static_cast<int64_t>(mask.he_count()))
          .total() +
      c.train_cost_per_param_sample * static_cast<double>(dim) * sample_epochs;

  last_mask_ = mask;
  last_update_ = std::move(update);
  last_client_updates_ = std::move(updates);
  last_cohort_ = std::move(cohort);

  const std::chrono::duration<double> wall =
      std::chrono::steady_clock::now() - wall_start;
  return RoundMetrics{.round = t,
                      .r_t = r_t,
                      .he_count = static_cast<int64_t>(mask.he_count()),
                      .accuracy = accuracy,
                      .sim_time_s = sim_time,
                      .wall_time_s = wall.count()};
}

ExperimentReport RunExperiment(const ExperimentConfig& config, int workers) {
  ExperimentReport report;
  report.config = config.echo;
  report.he_backend = std::string(HeBackendName(config.he_backend));
  report.notes.push_back(
      "time: simulated HE cost (encrypt + aggregate + decrypt, linear in the "
      "HE part length) plus simulated training cost; wall time only in the "
      "round table");
  report.notes.push_back("all clients apply the global update each round");
  if (config.protection.kind == ProtectionKind::kAmplitudeVaryingDp) {
    report.notes.push_back(absl::StrCat(
        "amplitude-varying DP simplified to sigma_t = sigma_z * ",
        config.protection.amplitude_scale, "^t"));
  }
  if (config.protection.kind == ProtectionKind::kSerial) {
    report.notes.push_back("serial: clip and noise, then encrypt everything");
  }
  report.notes.push_back(
      "theorem_bound: qualitative diagnostic with unit constant on the 1/T "
      "term");
  report.theorem_bound =
      TheoremBound(BoundInputs{.c1 = config.bound_c1,
                               .c2 = config.bound_c2,
                               .r = BoundRatio(config),
                               .epsilon = config.epsilon,
                               .delta = config.delta,
                               .num_clients = config.round.clients_total,
                               .rounds = config.round.rounds});

  auto fail = [&](const absl::Status& s) {
    report.complete = false;
    report.error = s.ToString();
  };

  auto sim = Simulation::Create(config, workers);
  if (!sim.ok()) {
    fail(sim.status());
    return report;
  }
  report.dim = static_cast<int64_t>((*sim)->dim());
  report.sensitivity = (*sim)->sensitivity();
  report.sigma_z = (*sim)->sigma_z();

  for (int64_t t = 0; t < config.round.rounds; ++t) {
    absl::StatusOr<RoundMetrics> m = (*sim)->RunRound(t);
    if (!m.ok()) {
      fail(m.status());
      break;
    }
    report.total_sim_time_s += m->sim_time_s;
    report.total_wall_time_s += m->wall_time_s;
    report.final_accuracy = m->accuracy;
    report.rounds.push_back(*m);
  }
  if (report.total_sim_time_s > 0.0) {
    auto ratio = EfficiencyRatio(100.0 * report.final_accuracy,
                                 report.total_sim_time_s);
    if (ratio.ok()) report.efficiency_ratio = *ratio;
  }
  return report;
}

}  // namespace hybridfl
