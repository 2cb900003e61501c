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

#include "hybridfl/cli.h"

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"
#include "hybridfl/config.h"
#include "hybridfl/dp_engine.h"
#include "hybridfl/fl_runtime.h"
#include "hybridfl/metrics_report.h"
#include "hybridfl/partition_voting.h"
#include "hybridfl/rng.h"
#include "hybridfl/status_macros.h"

namespace hybridfl {
namespace {

namespace fs = std::filesystem;

struct GlobalFlags {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<uint64_t> seed;
  int workers = 1;
  std::vector<std::string> overrides;
};

absl::StatusOr<Config> LoadConfig(const GlobalFlags& flags, bool required) {
  Config config;
  if (!flags.config_path.empty()) {
    ASSIGN_OR_RETURN(config, Config::Load(flags.config_path));
  } else if (required) {
    return absl::InvalidArgumentError("--config is required");
  }
  for (const std::string& o : flags.overrides) {
    RETURN_IF_ERROR(config.ApplyOverride(o));
  }
  if (flags.seed.has_value()) {
    RETURN_IF_ERROR(config.Set("seed", absl::StrCat(*flags.seed)));
  }
  return config;
}

absl::Status WriteReport(const ExperimentReport& report,
                         const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot create ", dir, ": ", ec.message()));
  }
  RETURN_IF_ERROR(
      WriteFileAtomic((fs::path(dir) / "report.json").string(),
                      EmitJson(report)));
  return WriteFileAtomic((fs::path(dir) / "rounds.csv").string(),
                         EmitCsv(report));
}

int Fail(std::ostream& err, int code, const absl::Status& s) {
  err << "error: " << s.message() << "\n";
  return code;
}

int CmdRun(const GlobalFlags& flags, std::ostream& out, std::ostream& err) {
  auto config = LoadConfig(flags, /*required=*/true);
  if (!config.ok()) return Fail(err, kExitConfigError, config.status());
  auto exp = BuildExperimentConfig(*config);
  if (!exp.ok()) return Fail(err, kExitConfigError, exp.status());

  ExperimentReport report = RunExperiment(*exp, flags.workers);
  if (absl::Status s = WriteReport(report, flags.out_dir); !s.ok()) {
    return Fail(err, kExitRuntimeError, s);
  }
  if (!report.complete) {
    err << "error: run incomplete after " << report.rounds.size()
        << " rounds: " << report.error << "\n";
    return kExitRuntimeError;
  }
  out << absl::StrFormat(
      "rounds=%d final_accuracy=%.4f sim_time_s=%.4f efficiency_ratio=%.4f\n",
      report.rounds.size(), report.final_accuracy, report.total_sim_time_s,
      report.efficiency_ratio);
  out << "wrote " << (fs::path(flags.out_dir) / "report.json").string()
      << " and rounds.csv\n";
  return kExitOk;
}

std::string SanitizeForPath(absl::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c == '/' || c == '\\' || c == ' ') c = '_';
  }
  return out;
}

int CmdSweep(const GlobalFlags& flags, const std::string& param,
             const std::string& values_text, std::ostream& out,
             std::ostream& err) {
  auto base = LoadConfig(flags, /*required=*/true);
  if (!base.ok()) return Fail(err, kExitConfigError, base.status());
  std::vector<std::string> values =
      absl::StrSplit(values_text, ',', absl::SkipWhitespace());
  for (std::string& v : values) v = std::string(absl::StripAsciiWhitespace(v));
  if (values.empty()) {
    return Fail(err, kExitConfigError,
                absl::InvalidArgumentError("--values is empty"));
  }
  {
    Config probe = *base;
    if (absl::Status s = probe.Set(param, values.front()); !s.ok()) {
      return Fail(err, kExitConfigError, s);
    }
  }

  std::string summary = "value,accuracy,sim_time_s,efficiency_ratio\n";
  int failures = 0;
  for (const std::string& value : values) {
    Config config = *base;
    absl::Status s = config.Set(param, value);
    absl::StatusOr<ExperimentConfig> exp =
        s.ok() ? BuildExperimentConfig(config)
               : absl::StatusOr<ExperimentConfig>(s);
    if (!exp.ok()) {
      err << "sweep " << param << "=" << value
          << ": error: " << exp.status().message() << "\n";
      absl::StrAppend(&summary, value, ",,,\n");
      ++failures;
      continue;
    }
    ExperimentReport report = RunExperiment(*exp, flags.workers);
    const std::string dir =
        (fs::path(flags.out_dir) /
         SanitizeForPath(absl::StrCat(param, "=", value)))
            .string();
    if (absl::Status w = WriteReport(report, dir); !w.ok()) {
      err << "sweep " << param << "=" << value << ": error: " << w.message()
          << "\n";
      ++failures;
    }
    if (!report.complete) {
      err << "sweep " << param << "=" << value
          << ": incomplete: " << report.error << "\n";
      absl::StrAppend(&summary, value, ",,,\n");
      ++failures;
      continue;
    }
    absl::StrAppendFormat(&summary, "%s,%.17g,%.17g,%.17g\n", value,
                          report.final_accuracy, report.total_sim_time_s,
                          report.efficiency_ratio);
    out << absl::StrFormat("%s=%s accuracy=%.4f sim_time_s=%.4f\n", param,
                           value, report.final_accuracy,
                           report.total_sim_time_s);
  }
  std::error_code ec;
  fs::create_directories(flags.out_dir, ec);
  if (absl::Status s = WriteFileAtomic(
          (fs::path(flags.out_dir) / "summary.csv").string(), summary);
      !s.ok()) {
    return Fail(err, kExitRuntimeError, s);
  }
  if (failures > 0) {
    err << failures << " of " << values.size() << " sub-runs failed\n";
    return kExitPartialSweep;
  }
  return kExitOk;
}

struct AccountantFlags {
  double epsilon = 1.0;
  double delta = 1e-5;
  double q = 1.0;
  int64_t rounds = 50;
  double theta = 1.0;
  int64_t min_dataset = 100;
};

int CmdAccountant(const AccountantFlags& f, std::ostream& out,
                  std::ostream& err) {
  PrivacyBudget budget{.epsilon = f.epsilon,
                       .delta = f.delta,
                       .q = f.q,
                       .rounds = f.rounds,
                       .theta = f.theta,
                       .min_dataset_size = f.min_dataset};
  auto sensitivity = Sensitivity(f.theta, f.min_dataset);
  if (!sensitivity.ok()) {
    return Fail(err, kExitConfigError, sensitivity.status());
  }
  auto sigma = SigmaFromBudget(budget);
  if (!sigma.ok()) return Fail(err, kExitConfigError, sigma.status());
  out << absl::StrFormat("sensitivity %.15g\nsigma_z %.15g\n", *sensitivity,
                         *sigma);
  return kExitOk;
}

struct VoteDemoFlags {
  int clients = 3;
  int dim = 8;
  double r = 0.25;
  std::string strategy = "max";
  std::string proposals;  // "1,4;1,2;4,1"
  int k = -1;
};

std::string FormatIndices(absl::Span<const size_t> indices) {
  return absl::StrCat("{", absl::StrJoin(indices, ", "), "}");
}

std::string TokenPrefix(const VoteToken& token) {
  std::string hex;
  for (int i = 0; i < 4; ++i) absl::StrAppendFormat(&hex, "%02x", token[i]);
  return hex;
}

int CmdVoteDemo(const VoteDemoFlags& f, uint64_t seed, std::ostream& out,
                std::ostream& err) {
  std::vector<PartitionMask> proposals;
  size_t dim = static_cast<size_t>(std::max(f.dim, 0));
  size_t k = 0;
  if (!f.proposals.empty()) {
    std::vector<std::vector<size_t>> lists;
    size_t max_index = 0;
    for (absl::string_view client :
         absl::StrSplit(f.proposals, ';', absl::SkipWhitespace())) {
      std::vector<size_t> list;
      for (absl::string_view item :
           absl::StrSplit(client, ',', absl::SkipWhitespace())) {
        size_t idx = 0;
        if (!absl::SimpleAtoi(absl::StripAsciiWhitespace(item), &idx)) {
          return Fail(err, kExitConfigError,
                      absl::InvalidArgumentError(absl::StrCat(
                          "--proposals: bad index '", item, "'")));
        }
        max_index = std::max(max_index, idx);
        list.push_back(idx);
      }
      std::sort(list.begin(), list.end());
      lists.push_back(std::move(list));
    }
    if (lists.empty()) {
      return Fail(err, kExitConfigError,
                  absl::InvalidArgumentError("--proposals is empty"));
    }
    dim = std::max(dim, max_index + 1);
    k = f.k >= 0 ? static_cast<size_t>(f.k) : lists.front().size();
    for (auto& list : lists) {
      auto mask = PartitionMask::Create(std::move(list), dim);
      if (!mask.ok()) return Fail(err, kExitConfigError, mask.status());
      proposals.push_back(*std::move(mask));
    }
  } else {
    if (f.clients < 1 || dim < 1) {
      return Fail(err, kExitConfigError,
                  absl::InvalidArgumentError("need clients >= 1, dim >= 1"));
    }
    auto strategy = ParsePartitionStrategy(f.strategy);
    if (!strategy.ok()) return Fail(err, kExitConfigError, strategy.status());
    k = f.k >= 0 ? static_cast<size_t>(f.k) : TargetCount(f.r, dim);
    const double r = static_cast<double>(k) / static_cast<double>(dim);
    for (int i = 0; i < f.clients; ++i) {
      Rng rng(DeriveSeed(seed, StreamTag::kData, {static_cast<uint64_t>(i)}));
      ParamVector u(dim);
      for (double& v : u) v = rng.Gaussian();
      auto mask = ProposePartition(
          u, r, *strategy,
          DeriveSeed(seed, StreamTag::kPartition, {static_cast<uint64_t>(i)}));
      if (!mask.ok()) return Fail(err, kExitRuntimeError, mask.status());
      proposals.push_back(*std::move(mask));
    }
  }
  if (k > dim) {
    return Fail(err, kExitConfigError,
                absl::InvalidArgumentError(
                    absl::StrCat("k = ", k, " exceeds dim = ", dim)));
  }

  const VoteKey key = VoteKey::Derive(DeriveSeed(seed, StreamTag::kVoteKey), 0);
  std::vector<VoteMessage> messages;
  std::map<VoteToken, int> counts;
  for (size_t i = 0; i < proposals.size(); ++i) {
    auto msg = EncryptIndices(proposals[i], key, static_cast<uint32_t>(i));
    if (!msg.ok()) return Fail(err, kExitRuntimeError, msg.status());
    out << "client " << i << " proposes " << FormatIndices(proposals[i].he_indices())
        << "\n";
    for (const VoteToken& t : msg->tokens) ++counts[t];
    messages.push_back(*std::move(msg));
  }
  out << "server sees " << counts.size() << " distinct tokens:\n";
  for (const auto& [token, count] : counts) {
    out << "  " << TokenPrefix(token) << "... x" << count << "\n";
  }
  auto winners = TallyVotes(messages, static_cast<int64_t>(k));
  if (!winners.ok()) return Fail(err, kExitRuntimeError, winners.status());
  auto mask = DecodePartition(*winners, key, dim, k);
  if (!mask.ok()) return Fail(err, kExitRuntimeError, mask.status());
  out << "top-" << k << " partition " << FormatIndices(mask->he_indices())
      << "\n";
  return kExitOk;
}

int CmdReport(const std::string& path, bool csv, std::ostream& out,
              std::ostream& err) {
  auto text = ReadFile(path);
  if (!text.ok()) return Fail(err, kExitRuntimeError, text.status());
  auto report = ParseReportJson(*text);
  if (!report.ok()) return Fail(err, kExitRuntimeError, report.status());
  if (csv) {
    out << EmitCsv(*report);
    return kExitOk;
  }
  out << absl::StrFormat(
      "complete         %s\nhe_backend       %s\ndim              %d\n"
      "sigma_z          %.6g\nrounds           %d\nfinal_accuracy   %.4f\n"
      "total_sim_time_s %.4f\nefficiency_ratio %.4f\ntheorem_bound    %.6g\n",
      report->complete ? "true" : "false", report->he_backend, report->dim,
      report->sigma_z, report->rounds.size(), report->final_accuracy,
      report->total_sim_time_s, report->efficiency_ratio,
      report->theorem_bound);
  if (!report->complete) out << "error            " << report->error << "\n";
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Federated learning with partitioned DP/HE update protection"};
  app.require_subcommand(1);
  GlobalFlags flags;
  uint64_t seed = 0;
  app.add_option("--config", flags.config_path, "config file (key = value)");
  app.add_option("--out", flags.out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "override the seed");
  app.add_option("--workers", flags.workers, "worker threads per round")
      ->check(CLI::PositiveNumber);
  app.add_option("--set", flags.overrides, "key=value override (repeatable)")
      ->allow_extra_args(false);

  auto* run = app.add_subcommand("run", "run one experiment");

  std::string sweep_param, sweep_values;
  auto* sweep = app.add_subcommand("sweep", "run one experiment per value");
  sweep->add_option("--param", sweep_param, "config key to vary")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")
      ->required();

  AccountantFlags acc;
  auto* accountant =
      app.add_subcommand("accountant", "print sensitivity and sigma_z");
  accountant->add_option("--epsilon", acc.epsilon);
  accountant->add_option("--delta", acc.delta);
  accountant->add_option("--q", acc.q, "client sampling ratio n/N");
  accountant->add_option("--rounds", acc.rounds);
  accountant->add_option("--theta", acc.theta);
  accountant->add_option("--min-dataset", acc.min_dataset);

  VoteDemoFlags vote;
  auto* vote_demo =
      app.add_subcommand("vote-demo", "trace one partition vote");
  vote_demo->add_option("--clients", vote.clients);
  vote_demo->add_option("--dim", vote.dim);
  vote_demo->add_option("--r", vote.r);
  vote_demo->add_option("--strategy", vote.strategy);
  vote_demo->add_option("--proposals", vote.proposals,
                        "explicit proposals, e.g. \"1,4;1,2;4,1\"");
  vote_demo->add_option("--k", vote.k, "partition size");

  std::string report_path;
  bool report_csv = false;
  auto* report = app.add_subcommand("report", "summarise a report.json");
  report->add_option("--in", report_path)->required();
  report->add_flag("--csv", report_csv, "print the round table instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  if (seed_opt->count() > 0) flags.seed = seed;
  const uint64_t effective_seed = flags.seed.value_or(1);

  if (run->parsed()) return CmdRun(flags, out, err);
  if (sweep->parsed()) {
    return CmdSweep(flags, sweep_param, sweep_values, out, err);
  }
  if (accountant->parsed()) return CmdAccountant(acc, out, err);
  if (vote_demo->parsed()) return CmdVoteDemo(vote, effective_seed, out, err);
  if (report->parsed()) return CmdReport(report_path, report_csv, out, err);
  return kExitConfigError;
}

}  // namespace hybridfl
