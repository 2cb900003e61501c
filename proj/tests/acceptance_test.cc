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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "hybridfl/cli.h"
#include "hybridfl/config.h"
#include "hybridfl/fl_runtime.h"
#include "hybridfl/he_backend.h"
#include "hybridfl/metrics_report.h"
#include "hybridfl/partition_voting.h"
#include "hybridfl/rng.h"

namespace hybridfl {
namespace {

namespace fs = std::filesystem;

// Tolerances and limits.
constexpr double kSigmaReference = 0.678614042441511;  // 40-digit evaluation
constexpr double kHeTolerance = 1e-2;
constexpr double kModeTolerance = 1e-12;
constexpr double kStrategyMargin = 0.10;
constexpr double kRatioGain = 0.15;
constexpr double kRatioInversion = 0.02;
constexpr int kHeTrials = 100;
constexpr int kVoteTrials = 1000;
constexpr int kBoundPoints = 1000;
const uint64_t kSeeds[] = {1, 2, 3};

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;  // 0 = none
  std::function<Outcome()> run;
};

std::string OrderingConfigPath() {
  return (fs::path(HYBRIDFL_SOURCE_DIR) / "configs" / "ordering.cfg").string();
}

ExperimentConfig OrderingConfig(uint64_t seed,
                                std::vector<std::string> overrides) {
  auto config = Config::Load(OrderingConfigPath());
  if (!config.ok()) {
    std::fprintf(stderr, "%s\n", config.status().ToString().c_str());
    std::abort();
  }
  overrides.push_back(absl::StrCat("seed=", seed));
  for (const std::string& kv : overrides) {
    if (!config->ApplyOverride(kv).ok()) std::abort();
  }
  auto built = BuildExperimentConfig(*config);
  if (!built.ok()) std::abort();
  return *built;
}

double MeanFinalAccuracy(std::vector<std::string> overrides,
                         std::vector<double>* per_seed = nullptr,
                         std::vector<double>* sim_times = nullptr) {
  double sum = 0.0;
  for (uint64_t seed : kSeeds) {
    ExperimentReport r = RunExperiment(OrderingConfig(seed, overrides));
    if (!r.complete) {
      std::fprintf(stderr, "run failed: %s\n", r.error.c_str());
      return std::nan("");
    }
    sum += r.final_accuracy;
    if (per_seed != nullptr) per_seed->push_back(r.final_accuracy);
    if (sim_times != nullptr) sim_times->push_back(r.total_sim_time_s);
  }
  return sum / std::size(kSeeds);
}

int RunCliCaptured(std::vector<std::string> args, std::string* out) {
  args.insert(args.begin(), "hybridfl");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  int code = RunCli(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out != nullptr) *out = o.str() + e.str();
  return code;
}

// 1
Outcome Accountant() {
  std::string out;
  int code = RunCliCaptured({"accountant", "--epsilon", "1", "--delta", "1e-5",
                             "--q", "1", "--rounds", "50", "--theta", "1",
                             "--min-dataset", "100"},
                            &out);
  const size_t pos = out.find("sigma_z ");
  if (code != 0 || pos == std::string::npos) return {false, out};
  const double sigma = std::stod(out.substr(pos + 8));
  const std::string got = absl::StrFormat("%.6g", sigma);
  const std::string want = absl::StrFormat("%.6g", kSigmaReference);
  return {got == want,
          absl::StrCat("sigma_z = ", got, ", reference ", want)};
}

// 2
Outcome Efficiency() {
  struct Row {
    double acc, time;
    const char* want;
  };
  const Row rows[] = {{80.93, 3571, "2.27"},
                      {20.28, 3007, "0.67"},
                      {81.14, 18527, "0.44"}};
  bool ok = true;
  std::string detail;
  for (const Row& row : rows) {
    auto r = EfficiencyRatio(row.acc, row.time);
    const std::string got = r.ok() ? absl::StrFormat("%.2f", *r) : "error";
    ok &= got == row.want;
    absl::StrAppend(&detail, got, "/", row.want, " ");
  }
  return {ok, detail};
}

// 3
Outcome HeCorrectness() {
  auto backend = MakeHeBackend(HeBackendKind::kCkksLite, HeParams());
  if (!backend.ok()) return {false, backend.status().ToString()};
  auto keys = (*backend)->KeyGen(12345);
  if (!keys.ok()) return {false, keys.status().ToString()};
  Rng rng(777);
  double worst = 0.0;
  for (int trial = 0; trial < kHeTrials; ++trial) {
    const size_t count = 1 + rng.UniformIndex(16);
    const size_t len = 1 + rng.UniformIndex(8192);
    std::vector<long double> expected(len, 0.0L);
    std::vector<Ciphertext> acc;
    for (size_t c = 0; c < count; ++c) {
      std::vector<double> x(len);
      for (size_t i = 0; i < len; ++i) {
        x[i] = 2.0 * rng.Uniform01() - 1.0;
        expected[i] += x[i];
      }
      auto cts = (*backend)->Encrypt(keys->public_key, x, rng.NextU64());
      if (!cts.ok()) return {false, cts.status().ToString()};
      if (acc.empty()) {
        acc = *std::move(cts);
      } else {
        auto sum = (*backend)->AddVectors(acc, *cts);
        if (!sum.ok()) return {false, sum.status().ToString()};
        acc = *std::move(sum);
      }
    }
    auto y = (*backend)->Decrypt(keys->secret_key, acc, len);
    if (!y.ok()) return {false, y.status().ToString()};
    for (size_t i = 0; i < len; ++i) {
      worst = std::max(
          worst, static_cast<double>(std::fabs((*y)[i] - expected[i])));
    }
  }
  return {worst <= kHeTolerance,
          absl::StrFormat("max |error| = %.3g over %d sets (tolerance %g)",
                          worst, kHeTrials, kHeTolerance)};
}

// 4
VoteToken ReferenceToken(const VoteKey& key, uint64_t index) {
  uint8_t block[16];
  for (int i = 0; i < 8; ++i) {
    block[i] = static_cast<uint8_t>(key.round_binding >> (56 - 8 * i));
    block[8 + i] = static_cast<uint8_t>(index >> (56 - 8 * i));
  }
  VoteToken out{};
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, key.key.data(), nullptr);
  EVP_CIPHER_CTX_set_padding(ctx, 0);
  int len = 0;
  EVP_EncryptUpdate(ctx, out.data(), &len, block, 16);
  EVP_CIPHER_CTX_free(ctx);
  return out;
}

std::vector<size_t> BruteForce(const std::vector<std::vector<size_t>>& props,
                               const VoteKey& key, size_t dim, size_t k) {
  std::map<size_t, int> counts;
  for (const auto& p : props) {
    for (size_t j : p) ++counts[j];
  }
  std::vector<std::pair<size_t, int>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return ReferenceToken(key, a.first) < ReferenceToken(key, b.first);
  });
  std::set<size_t> chosen;
  for (size_t i = 0; i < ranked.size() && chosen.size() < k; ++i) {
    chosen.insert(ranked[i].first);
  }
  for (size_t j = 0; j < dim && chosen.size() < k; ++j) chosen.insert(j);
  return {chosen.begin(), chosen.end()};
}

absl::StatusOr<std::vector<size_t>> Vote(
    const std::vector<std::vector<size_t>>& props, const VoteKey& key,
    size_t dim, size_t k) {
  std::vector<VoteMessage> msgs;
  for (size_t i = 0; i < props.size(); ++i) {
    auto mask = PartitionMask::Create(props[i], dim);
    if (!mask.ok()) return mask.status();
    auto m = EncryptIndices(*mask, key, static_cast<uint32_t>(i));
    if (!m.ok()) return m.status();
    msgs.push_back(*std::move(m));
  }
  auto winners = TallyVotes(msgs, static_cast<int64_t>(k));
  if (!winners.ok()) return winners.status();
  auto mask = DecodePartition(*winners, key, dim, k);
  if (!mask.ok()) return mask.status();
  return std::vector<size_t>(mask->he_indices().begin(),
                             mask->he_indices().end());
}

Outcome Voting() {
  const VoteKey fig_key = VoteKey::Derive(1, 0);
  auto fig = Vote({{1, 4}, {1, 2}, {1, 4}}, fig_key, 6, 2);
  if (!fig.ok() || *fig != std::vector<size_t>{1, 4}) {
    return {false, "figure scenario did not yield {1, 4}"};
  }
  Rng rng(4242);
  int mismatches = 0;
  for (int trial = 0; trial < kVoteTrials; ++trial) {
    const size_t dim = 1 + rng.UniformIndex(64);
    const size_t n = 1 + rng.UniformIndex(16);
    const size_t k = rng.UniformIndex(dim + 1);
    const VoteKey key = VoteKey::Derive(rng.NextU64(), rng.UniformIndex(1000));
    std::vector<std::vector<size_t>> props;
    for (size_t i = 0; i < n; ++i) {
      auto p = rng.SampleWithoutReplacement(dim, rng.UniformIndex(dim + 1));
      std::sort(p.begin(), p.end());
      props.push_back(std::move(p));
    }
    auto got = Vote(props, key, dim, k);
    if (!got.ok() || *got != BruteForce(props, key, dim, k)) ++mismatches;
  }
  return {mismatches == 0,
          absl::StrCat("figure scenario {1, 4}; ", mismatches, " of ",
                       kVoteTrials, " random instances differ from oracle")};
}

// 5
Outcome ModeLimits() {
  double worst = 0.0;
  bool complete = true;
  auto compare = [&](std::vector<std::string> a, std::vector<std::string> b) {
    ExperimentReport ra = RunExperiment(OrderingConfig(kSeeds[0], a));
    ExperimentReport rb = RunExperiment(OrderingConfig(kSeeds[0], b));
    complete &= ra.complete && rb.complete &&
                ra.rounds.size() == rb.rounds.size();
    for (size_t t = 0; t < std::min(ra.rounds.size(), rb.rounds.size()); ++t) {
      worst = std::max(worst, std::fabs(ra.rounds[t].accuracy -
                                        rb.rounds[t].accuracy));
    }
  };
  compare({"protection.kind=parallel", "schedule.r0=1"},
          {"protection.kind=he_only"});
  compare({"protection.kind=parallel", "schedule.r0=0"},
          {"protection.kind=dp_only"});
  return {complete && worst <= kModeTolerance,
          absl::StrFormat("max round accuracy difference %.3g", worst)};
}

// 6
Outcome StrategyOrdering() {
  std::vector<double> mx, mn, rd;
  const double max_acc =
      MeanFinalAccuracy({"protection.strategy=max", "schedule.r0=0.1"}, &mx);
  const double min_acc =
      MeanFinalAccuracy({"protection.strategy=min", "schedule.r0=0.1"}, &mn);
  const double rand_acc =
      MeanFinalAccuracy({"protection.strategy=random", "schedule.r0=0.1"}, &rd);
  const bool ok = max_acc >= rand_acc + kStrategyMargin &&
                  max_acc >= min_acc + kStrategyMargin;
  return {ok, absl::StrFormat("mean accuracy max %.4f, random %.4f, min %.4f "
                              "(margin %.2f)",
                              max_acc, rand_acc, min_acc, kStrategyMargin)};
}

// 7
Outcome RatioMonotonicity() {
  const char* ratios[] = {"0", "0.05", "0.1", "0.2", "1"};
  std::vector<double> means;
  std::vector<std::vector<double>> times;
  for (const char* r : ratios) {
    std::vector<double> t;
    means.push_back(MeanFinalAccuracy({absl::StrCat("schedule.r0=", r)},
                                      nullptr, &t));
    times.push_back(t);
  }
  const bool gain = means.back() - means.front() >= kRatioGain;
  int inversions = 0;
  bool small = true;
  for (size_t i = 1; i < means.size(); ++i) {
    if (means[i] < means[i - 1]) {
      ++inversions;
      small &= means[i - 1] - means[i] <= kRatioInversion;
    }
  }
  bool time_increasing = true;
  for (size_t i = 1; i < times.size(); ++i) {
    for (size_t s = 0; s < times[i].size(); ++s) {
      time_increasing &= times[i][s] > times[i - 1][s];
    }
  }
  std::string detail = "mean accuracy";
  for (size_t i = 0; i < means.size(); ++i) {
    absl::StrAppendFormat(&detail, " r=%s:%.4f", ratios[i], means[i]);
  }
  absl::StrAppendFormat(&detail, "; sim time %.3f..%.3f s, %s", times[0][0],
                        times.back()[0],
                        time_increasing ? "strictly increasing" : "NOT increasing");
  return {gain && inversions <= 1 && small && time_increasing, detail};
}

// 8
Outcome DynamicSchedule() {
  ExperimentReport r = RunExperiment(OrderingConfig(
      kSeeds[0], {"schedule.mode=dynamic", "schedule.r0=0.1",
                  "schedule.lambda=0.99"}));
  if (!r.complete) return {false, r.error};
  int bad = 0;
  for (const RoundMetrics& m : r.rounds) {
    const double ratio = 0.1 * std::pow(0.99, static_cast<double>(m.round));
    const int64_t want =
        static_cast<int64_t>(TargetCount(ratio, static_cast<size_t>(r.dim)));
    bad += m.he_count != want;
  }
  return {bad == 0 && !r.rounds.empty(),
          absl::StrFormat("%d rounds, dim %d, HE sizes %d..%d, %d mismatches",
                          r.rounds.size(), r.dim, r.rounds.front().he_count,
                          r.rounds.back().he_count, bad)};
}

// 9
Outcome BoundDiagnostic() {
  Rng rng(909);
  int violations = 0;
  for (int i = 0; i < kBoundPoints; ++i) {
    BoundInputs b{.c1 = 5 * rng.Uniform01(),
                  .c2 = 0.01 + 5 * rng.Uniform01(),
                  .r = 0.99 * rng.Uniform01(),
                  .epsilon = 0.05 + 10 * rng.Uniform01(),
                  .delta = std::pow(10.0, -1 - 8 * rng.Uniform01()),
                  .num_clients = 1 + static_cast<int64_t>(rng.UniformIndex(100)),
                  .rounds = 1 + static_cast<int64_t>(rng.UniformIndex(500))};
    const double base = TheoremBound(b);
    BoundInputs r2 = b;
    r2.r = b.r + (1 - b.r) * (0.01 + 0.99 * rng.Uniform01());
    BoundInputs e2 = b;
    e2.epsilon = b.epsilon * (1.01 + rng.Uniform01());
    violations += !(TheoremBound(r2) < base);
    violations += !(TheoremBound(e2) < base);
    BoundInputs one = b;
    one.r = 1.0;
    violations += TheoremBound(one) != 1.0 / static_cast<double>(b.rounds);
  }
  return {violations == 0,
          absl::StrCat(kBoundPoints, " points, ", violations, " violations")};
}

// 10
Outcome Determinism() {
  const fs::path dir = fs::temp_directory_path() / "hybridfl_acceptance";
  fs::remove_all(dir);
  std::vector<std::string> reports;
  for (const char* workers : {"1", "1", "4"}) {
    const std::string out = (dir / absl::StrCat("w", reports.size())).string();
    std::string log;
    int code = RunCliCaptured({"--config", OrderingConfigPath(), "--seed", "1",
                               "--workers", workers, "--out", out, "run"},
                              &log);
    if (code != 0) return {false, log};
    auto text = ReadFile((fs::path(out) / "report.json").string());
    if (!text.ok()) return {false, text.status().ToString()};
    reports.push_back(*std::move(text));
  }
  fs::remove_all(dir);
  const bool same = reports[0] == reports[1] && reports[0] == reports[2];
  return {same, absl::StrCat("report.json ", reports[0].size(), " bytes, ",
                             same ? "identical" : "DIFFERENT",
                             " across 2 runs and --workers 1/4")};
}

}  // namespace
}  // namespace hybridfl

int main() {
  using hybridfl::Criterion;
  const std::vector<Criterion> criteria = {
      {1, "accountant exactness", 1, hybridfl::Accountant},
      {2, "efficiency-ratio fidelity", 1, hybridfl::Efficiency},
      {3, "HE correctness", 60, hybridfl::HeCorrectness},
      {4, "voting oracle equivalence", 10, hybridfl::Voting},
      {5, "mode-limit equivalence", 120, hybridfl::ModeLimits},
      {6, "strategy ordering", 600, hybridfl::StrategyOrdering},
      {7, "ratio monotonicity", 900, hybridfl::RatioMonotonicity},
      {8, "dynamic schedule exactness", 0, hybridfl::DynamicSchedule},
      {9, "bound diagnostic", 0, hybridfl::BoundDiagnostic},
      {10, "determinism", 0, hybridfl::Determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    hybridfl::Outcome o = c.run();
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    std::string detail = o.detail;
    if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
      o.pass = false;
      detail += absl::StrFormat(" [over time limit %.0f s]", c.time_limit_s);
    }
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s (%.2f s)\n",
                o.pass ? "PASS" : "FAIL", c.id, c.name, detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
