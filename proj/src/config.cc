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

#include "hybridfl/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"
#include "absl/strings/ascii.h"
#include "hybridfl/metrics_report.h"
#include "hybridfl/status_macros.h"

namespace hybridfl {

const std::vector<ConfigKey>& KnownConfigKeys() {
  static const auto* keys = new std::vector<ConfigKey>{
      {"seed", "1", "experiment seed; every random stream derives from it"},
      {"dataset.source", "synthetic", "'synthetic' or a CSV path"},
      {"dataset.num_samples", "2000", "synthetic sample count"},
      {"dataset.input_dim", "20", "synthetic feature count"},
      {"dataset.active_features", "0",
       "synthetic informative features (rest are zero); 0 = all"},
      {"dataset.num_classes", "4", "number of classes"},
      {"dataset.separation", "2.0", "distance of class means from origin"},
      {"dataset.test_fraction", "0.2", "held-out share, split before sharding"},
      {"dataset.partition", "iid", "'iid' or 'dirichlet'"},
      {"dataset.alpha", "1.0", "Dirichlet concentration"},
      {"model.kind", "mlp", "'linear', 'logistic' or 'mlp'"},
      {"model.hidden", "64", "comma-separated hidden widths (mlp)"},
      {"round.clients_total_N", "10", "total clients N"},
      {"round.clients_sampled_n", "10", "clients sampled per round n"},
      {"round.local_epochs_K", "3", "local epochs K"},
      {"round.learning_rate", "0.01", "local SGD learning rate"},
      {"round.batch_size", "32", "local minibatch size"},
      {"round.rounds_T", "50", "global rounds T"},
      {"round.train_cost_per_param_sample", "1e-8",
       "simulated seconds per parameter per processed sample"},
      {"protection.kind", "parallel",
       "none, dp_only, he_only, serial, parallel or amplitude_dp"},
      {"protection.strategy", "max", "partition proposal: max, min or random"},
      {"protection.amplitude_scale", "0.9",
       "per-round noise decay for amplitude_dp"},
      {"protection.bound_c1", "1.0", "clipping constant of the bound"},
      {"protection.bound_c2", "1.0", "noise constant of the bound"},
      {"schedule.mode", "static", "'static' or 'dynamic'"},
      {"schedule.r0", "0.1", "initial HE ratio"},
      {"schedule.lambda", "1.0", "per-round decay of the HE ratio"},
      {"dp.theta", "1.0", "clipping threshold"},
      {"dp.epsilon", "1.0", "privacy budget epsilon"},
      {"dp.delta", "1e-5", "privacy budget delta"},
      {"dp.sigma_z", "", "explicit noise stddev; empty = from the accountant"},
      {"he.backend", "mock", "'mock' or 'ckks_lite'"},
      {"he.ring_degree", "4096", "polynomial ring degree (slots)"},
      {"he.scale_bits", "20", "fixed-point scale exponent"},
      {"he.modulus_bits", "50", "ciphertext modulus size"},
      {"he.max_additions", "256", "advertised additive depth"},
      {"he.per_slot_seconds", "1e-6", "simulated cost per slot"},
      {"he.per_op_seconds", "1e-3", "simulated cost per vector operation"},
  };
  return *keys;
}

namespace {

const ConfigKey* FindKey(absl::string_view key) {
  for (const ConfigKey& k : KnownConfigKeys()) {
    if (k.name == key) return &k;
  }
  return nullptr;
}

}  // namespace

absl::StatusOr<Config> Config::Parse(absl::string_view text) {
  Config config;
  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_no;
    if (size_t hash = line.find('#'); hash != absl::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_no, ": expected key = value"));
    }
    absl::Status s = config.Set(absl::StripAsciiWhitespace(line.substr(0, eq)),
                                absl::StripAsciiWhitespace(line.substr(eq + 1)));
    if (!s.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_no, ": ", s.message()));
    }
  }
  return config;
}

absl::StatusOr<Config> Config::Load(const std::string& path) {
  ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  return Parse(text);
}

absl::Status Config::Set(absl::string_view key, absl::string_view value) {
  if (FindKey(key) == nullptr) {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown config key '", key, "'"));
  }
  values_[std::string(key)] = std::string(value);
  return absl::OkStatus();
}

absl::Status Config::ApplyOverride(absl::string_view assignment) {
  size_t eq = assignment.find('=');
  if (eq == absl::string_view::npos) {
    return absl::InvalidArgumentError(
        absl::StrCat("override '", assignment, "' is not key=value"));
  }
  return Set(absl::StripAsciiWhitespace(assignment.substr(0, eq)),
             absl::StripAsciiWhitespace(assignment.substr(eq + 1)));
}

bool Config::IsSet(absl::string_view key) const {
  return values_.find(key) != values_.end();
}

std::string Config::GetString(absl::string_view key) const {
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  const ConfigKey* k = FindKey(key);
  return k != nullptr ? std::string(k->default_value) : std::string();
}

absl::StatusOr<double> Config::GetDouble(absl::string_view key) const {
  const std::string text = GetString(key);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(v)) {
    return absl::InvalidArgumentError(
        absl::StrCat("config key '", key, "': '", text, "' is not a number"));
  }
  return v;
}

absl::StatusOr<int64_t> Config::GetInt(absl::string_view key) const {
  const std::string text = GetString(key);
  int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("config key '", key, "': '", text,
                     "' is not an integer"));
  }
  return v;
}

std::vector<std::pair<std::string, std::string>> Config::Effective() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const ConfigKey& k : KnownConfigKeys()) {
    out.emplace_back(std::string(k.name), GetString(k.name));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace hybridfl
