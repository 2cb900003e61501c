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

#include "hybridfl/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"
#include "absl/strings/ascii.h"
#include "hybridfl/rng.h"
#include "hybridfl/status_macros.h"

namespace hybridfl {
namespace {

constexpr int kMaxDirichletAttempts = 100;

bool ParseDouble(absl::string_view s, double& out) {
  s = absl::StripAsciiWhitespace(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

absl::StatusOr<Dataset> MakeSynthetic(const SyntheticSpec& spec,
                                      uint64_t seed) {
  if (spec.num_samples == 0 || spec.input_dim == 0 || spec.num_classes < 1) {
    return absl::InvalidArgumentError(
        "synthetic data needs samples, features and classes");
  }
  const size_t active =
      spec.active_features == 0 ? spec.input_dim : spec.active_features;
  if (active > spec.input_dim) {
    return absl::InvalidArgumentError(absl::StrCat(
        "active features ", active, " exceed input dim ", spec.input_dim));
  }
  Rng rng(seed);
  const size_t classes = static_cast<size_t>(spec.num_classes);
  std::vector<double> means(classes * active);
  for (size_t c = 0; c < classes; ++c) {
    auto mean = absl::MakeSpan(means).subspan(c * active, active);
    double norm = 0.0;
    for (double& x : mean) {
      x = rng.Gaussian();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : mean) x *= spec.separation / norm;
  }

  Dataset data{.num_features = spec.input_dim,
               .num_classes = spec.num_classes};
  data.labels.resize(spec.num_samples);
  for (size_t i = 0; i < spec.num_samples; ++i) {
    data.labels[i] = static_cast<int>(i % classes);
  }
  rng.Shuffle(absl::MakeSpan(data.labels));
  data.features.assign(spec.num_samples * spec.input_dim, 0.0);
  for (size_t i = 0; i < spec.num_samples; ++i) {
    const size_t c = static_cast<size_t>(data.labels[i]);
    for (size_t j = 0; j < active; ++j) {
      data.features[i * spec.input_dim + j] =
          means[c * active + j] + rng.Gaussian();
    }
  }
  return data;
}

absl::StatusOr<Dataset> ParseCsv(absl::string_view text, int num_classes) {
  if (num_classes < 1) {
    return absl::InvalidArgumentError("num_classes must be >= 1");
  }
  std::vector<absl::string_view> lines = absl::StrSplit(text, '\n');
  size_t line_no = 0;
  std::vector<std::string> header;
  Dataset data{.num_classes = num_classes};
  size_t label_col = 0;
  for (absl::string_view line : lines) {
    ++line_no;
    line = absl::StripSuffix(line, "\r");
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    std::vector<absl::string_view> cells = absl::StrSplit(line, ',');
    if (header.empty()) {
      for (absl::string_view c : cells) {
        header.emplace_back(absl::StripAsciiWhitespace(c));
      }
      auto it = std::find(header.begin(), header.end(), "label");
      label_col = it != header.end() ? static_cast<size_t>(it - header.begin())
                                     : header.size() - 1;
      if (header.size() < 2) {
        return absl::InvalidArgumentError(
            "CSV header needs at least one feature column and a label");
      }
      data.num_features = header.size() - 1;
      continue;
    }
    if (cells.size() != header.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": expected ", header.size(),
                       " columns, found ", cells.size()));
    }
    for (size_t col = 0; col < cells.size(); ++col) {
      double v = 0.0;
      if (!ParseDouble(cells[col], v)) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line_no, ": column '", header[col],
                         "' is not a finite number: '", cells[col], "'"));
      }
      if (col == label_col) {
        if (v != std::floor(v) || v < 0 || v >= num_classes) {
          return absl::InvalidArgumentError(absl::StrCat(
              "line ", line_no, ": label ", cells[col],
              " outside [0, ", num_classes, ")"));
        }
        data.labels.push_back(static_cast<int>(v));
      } else {
        data.features.push_back(v);
      }
    }
  }
  if (header.empty()) return absl::InvalidArgumentError("CSV is empty");
  return data;
}

absl::StatusOr<Dataset> LoadCsv(const std::string& path, int num_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto data = ParseCsv(buffer.str(), num_classes);
  if (!data.ok()) {
    return absl::Status(data.status().code(),
                        absl::StrCat(path, ": ", data.status().message()));
  }
  return data;
}

Dataset Subset(const Dataset& data, absl::Span<const size_t> indices) {
  Dataset out{.num_features = data.num_features,
              .num_classes = data.num_classes};
  out.features.reserve(indices.size() * data.num_features);
  out.labels.reserve(indices.size());
  for (size_t i : indices) {
    auto r = data.row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(data.labels[i]);
  }
  return out;
}

absl::StatusOr<TrainTestSplit> SplitTrainTest(const Dataset& data,
                                              double test_fraction,
                                              uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("test fraction must lie in (0, 1), got ", test_fraction));
  }
  const size_t n = data.size();
  const size_t n_test = static_cast<size_t>(
      std::floor(test_fraction * static_cast<double>(n) + 0.5));
  if (n_test == 0 || n_test >= n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "test fraction ", test_fraction, " of ", n,
        " samples leaves an empty train or test set"));
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(seed);
  rng.Shuffle(absl::MakeSpan(order));
  auto test_idx = absl::MakeConstSpan(order).subspan(0, n_test);
  auto train_idx = absl::MakeConstSpan(order).subspan(n_test);
  return TrainTestSplit{.train = Subset(data, train_idx),
                        .test = Subset(data, test_idx)};
}

absl::StatusOr<std::vector<std::vector<size_t>>> SplitClients(
    const Dataset& data, const DataPartition& partition, size_t num_clients,
    uint64_t seed) {
  if (num_clients == 0) {
    return absl::InvalidArgumentError("need at least one client");
  }
  const size_t n = data.size();
  if (num_clients > n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "cannot give each of ", num_clients, " clients a sample from ", n));
  }
  Rng rng(seed);
  std::vector<std::vector<size_t>> shards(num_clients);

  if (partition.scheme == PartitionScheme::kIid) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    rng.Shuffle(absl::MakeSpan(order));
    const size_t base = n / num_clients;
    const size_t extra = n % num_clients;
    size_t offset = 0;
    for (size_t c = 0; c < num_clients; ++c) {
      const size_t len = base + (c < extra ? 1 : 0);
      shards[c].assign(order.begin() + offset, order.begin() + offset + len);
      offset += len;
    }
    return shards;
  }

  if (!(partition.alpha > 0.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Dirichlet alpha must be positive, got ", partition.alpha));
  }
  std::vector<std::vector<size_t>> by_class(
      static_cast<size_t>(std::max(data.num_classes, 1)));
  for (size_t i = 0; i < n; ++i) {
    by_class[static_cast<size_t>(data.labels[i])].push_back(i);
  }
  for (int attempt = 0; attempt < kMaxDirichletAttempts; ++attempt) {
    for (auto& s : shards) s.clear();
    for (auto& members : by_class) {
      if (members.empty()) continue;
      std::vector<size_t> order = members;
      rng.Shuffle(absl::MakeSpan(order));
      std::vector<double> p(num_clients);
      double total = 0.0;
      for (double& x : p) {
        x = rng.Gamma(partition.alpha);
        total += x;
      }
      double cumulative = 0.0;
      size_t start = 0;
      for (size_t c = 0; c < num_clients; ++c) {
        cumulative += p[c];
        size_t end = c + 1 == num_clients
                         ? order.size()
                         : static_cast<size_t>(std::floor(
                               cumulative / total * order.size() + 0.5));
        end = std::clamp(end, start, order.size());
        shards[c].insert(shards[c].end(), order.begin() + start,
                         order.begin() + end);
        start = end;
      }
    }
    bool all_nonempty = std::all_of(shards.begin(), shards.end(),
                                    [](const auto& s) { return !s.empty(); });
    if (all_nonempty) {
      for (auto& s : shards) std::sort(s.begin(), s.end());
      return shards;
    }
  }
  return absl::FailedPreconditionError(absl::StrCat(
      "Dirichlet(", partition.alpha, ") split left a client empty after ",
      kMaxDirichletAttempts, " attempts"));
}

}  // namespace hybridfl
