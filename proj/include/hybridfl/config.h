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

#ifndef HYBRIDFL_CONFIG_H_
#define HYBRIDFL_CONFIG_H_

#include <map>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace hybridfl {

struct ConfigKey {
  absl::string_view name;
  absl::string_view default_value;
  absl::string_view help;
};

// Every recognised key with its default, in documentation order.
const std::vector<ConfigKey>& KnownConfigKeys();

// Flat dotted-key configuration:
//
//   # comment
//   round.rounds_T = 20
//   protection.kind = parallel
//
// Keys are validated against KnownConfigKeys(); unset keys take their
// defaults. Values are kept as text and typed by the getters.
class Config {
 public:
  Config() = default;

  static absl::StatusOr<Config> Parse(absl::string_view text);
  static absl::StatusOr<Config> Load(const std::string& path);

  absl::Status Set(absl::string_view key, absl::string_view value);
  // "key=value"
  absl::Status ApplyOverride(absl::string_view assignment);

  bool IsSet(absl::string_view key) const;
  std::string GetString(absl::string_view key) const;
  absl::StatusOr<double> GetDouble(absl::string_view key) const;
  absl::StatusOr<int64_t> GetInt(absl::string_view key) const;

  // All keys with effective values, sorted by key.
  std::vector<std::pair<std::string, std::string>> Effective() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace hybridfl

#endif  // HYBRIDFL_CONFIG_H_
