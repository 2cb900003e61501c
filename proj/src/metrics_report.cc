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

#include "hybridfl/metrics_report.h"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/string_view.h"
#include "json.hpp"

namespace hybridfl {

using ordered_json = nlohmann::ordered_json;

absl::StatusOr<double> Accuracy(const ModelSpec& spec,
                                absl::Span<const double> params,
                                const Dataset& test) {
  if (test.size() == 0) {
    return absl::InvalidArgumentError("accuracy of an empty test set");
  }
  if (params.size() != spec.ParamCount() ||
      test.num_features != spec.input_dim) {
    return absl::InvalidArgumentError("model and test set dimensions differ");
  }
  size_t correct = 0;
  for (size_t i = 0; i < test.size(); ++i) {
    if (PredictClass(spec, params, test.row(i)) == test.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

absl::StatusOr<double> EfficiencyRatio(double accuracy_pct, double time_s) {
  if (!(time_s > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("efficiency ratio needs a positive time, got ", time_s));
  }
  return accuracy_pct / time_s * 100.0;
}

double TheoremBound(const BoundInputs& in) {
  const double one_minus_r = 1.0 - in.r;
  const double n = static_cast<double>(in.num_clients);
  const double clipping = in.c1 * one_minus_r;
  const double noise = in.c2 * one_minus_r * std::log(1.0 / in.delta) /
                       (n * n * in.epsilon * in.epsilon);
  return clipping + noise + 1.0 / static_cast<double>(in.rounds);
}

std::string EmitJson(const ExperimentReport& report) {
  ordered_json j;
  j["complete"] = report.complete;
  if (!report.complete) j["error"] = report.error;
  ordered_json config = ordered_json::object();
  for (const auto& [key, value] : report.config) config[key] = value;
  j["config"] = std::move(config);
  j["he_backend"] = report.he_backend;
  j["time_metric"] = "simulated";
  j["notes"] = report.notes;
  j["dim"] = report.dim;
  j["sensitivity"] = report.sensitivity;
  j["sigma_z"] = report.sigma_z;
  ordered_json rounds = ordered_json::array();
  for (const RoundMetrics& m : report.rounds) {
    rounds.push_back(ordered_json{{"round", m.round},
                                  {"r_t", m.r_t},
                                  {"he_count", m.he_count},
                                  {"accuracy", m.accuracy},
                                  {"sim_time_s", m.sim_time_s}});
  }
  j["rounds"] = std::move(rounds);
  j["final_accuracy"] = report.final_accuracy;
  j["total_sim_time_s"] = report.total_sim_time_s;
  j["efficiency_ratio"] = report.efficiency_ratio;
  j["theorem_bound"] = report.theorem_bound;
  return j.dump(2) + "\n";
}

absl::StatusOr<ExperimentReport> ParseReportJson(absl::string_view json) {
  ordered_json j = ordered_json::parse(json, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    return absl::InvalidArgumentError("report is not a JSON object");
  }
  try {
    ExperimentReport r;
    r.complete = j.at("complete").get<bool>();
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    for (const auto& [key, value] : j.at("config").items()) {
      r.config.emplace_back(key, value.get<std::string>());
    }
    r.he_backend = j.at("he_backend").get<std::string>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
    r.dim = j.at("dim").get<int64_t>();
    r.sensitivity = j.at("sensitivity").get<double>();
    r.sigma_z = j.at("sigma_z").get<double>();
    for (const auto& m : j.at("rounds")) {
      r.rounds.push_back(RoundMetrics{
          .round = m.at("round").get<int64_t>(),
          .r_t = m.at("r_t").get<double>(),
          .he_count = m.at("he_count").get<int64_t>(),
          .accuracy = m.at("accuracy").get<double>(),
          .sim_time_s = m.at("sim_time_s").get<double>()});
    }
    r.final_accuracy = j.at("final_accuracy").get<double>();
    r.total_sim_time_s = j.at("total_sim_time_s").get<double>();
    r.efficiency_ratio = j.at("efficiency_ratio").get<double>();
    r.theorem_bound = j.at("theorem_bound").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed report: ", e.what()));
  }
}

std::string EmitCsv(const ExperimentReport& report) {
  std::string out = "round,r_t,accuracy,sim_time_s,wall_time_s\n";
  for (const RoundMetrics& m : report.rounds) {
    absl::StrAppendFormat(&out, "%d,%.17g,%.17g,%.17g,%.6f\n", m.round, m.r_t,
                          m.accuracy, m.sim_time_s, m.wall_time_s);
  }
  return out;
}

absl::Status WriteFileAtomic(const std::string& path, absl::string_view data) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.parent_path() /
                       absl::StrCat(".", target.filename().string(), ".tmp.",
                                    ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      return absl::UnavailableError(
          absl::StrCat("cannot open ", tmp.string(), " for writing"));
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) {
      return absl::DataLossError(absl::StrCat("write to ", tmp.string(),
                                              " failed"));
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    return absl::UnavailableError(
        absl::StrCat("cannot rename into ", path, ": ", ec.message()));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace hybridfl
