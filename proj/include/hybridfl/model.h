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

#ifndef HYBRIDFL_MODEL_H_
#define HYBRIDFL_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "absl/types/span.h"
#include "hybridfl/dataset.h"
#include "hybridfl/vec_core.h"

namespace hybridfl {

enum class ModelKind {
  kLinear,    // affine map, squared loss (one-hot targets; raw label when
              // num_classes == 1)
  kLogistic,  // affine map, softmax cross-entropy
  kMlp,       // ReLU hidden layers, softmax cross-entropy
};

absl::string_view ModelKindName(ModelKind kind);
absl::StatusOr<ModelKind> ParseModelKind(absl::string_view name);

// Parameters are flattened layer by layer as W (out x in, row-major) then b.
struct ModelSpec {
  ModelKind kind = ModelKind::kLogistic;
  size_t input_dim = 1;
  std::vector<size_t> hidden_dims;  // kMlp only
  size_t num_classes = 2;

  size_t ParamCount() const;
  absl::Status Validate() const;
  absl::Status CheckData(const Dataset& data) const;
};

// Xavier-uniform weights for kMlp, zeros otherwise. Biases start at zero.
ParamVector InitParams(const ModelSpec& spec, uint64_t seed);

struct TrainOptions {
  int epochs = 1;
  double learning_rate = 0.01;
  size_t batch_size = 32;
  // Record the full-data loss after every epoch.
  bool track_loss = false;
};

struct LocalTrainResult {
  ParamVector update;  // final minus initial parameters
  std::vector<double> epoch_losses;
};

// Seeded minibatch SGD for options.epochs epochs (shuffled each epoch).
// Fails on a non-finite loss.
absl::StatusOr<LocalTrainResult> LocalTrain(const ModelSpec& spec,
                                            absl::Span<const double> params,
                                            const Dataset& data,
                                            const TrainOptions& options,
                                            uint64_t seed);

// Mean loss over `data`.
absl::StatusOr<double> MeanLoss(const ModelSpec& spec,
                                absl::Span<const double> params,
                                const Dataset& data);

// Model outputs (logits, or regression values for kLinear).
std::vector<double> Forward(const ModelSpec& spec,
                            absl::Span<const double> params,
                            absl::Span<const double> x);

// argmax of the outputs; for single-output kLinear, the rounded prediction.
int PredictClass(const ModelSpec& spec, absl::Span<const double> params,
                 absl::Span<const double> x);

}  // namespace hybridfl

#endif  // HYBRIDFL_MODEL_H_
