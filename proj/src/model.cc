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

#include "hybridfl/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "absl/strings/string_view.h"
#include "hybridfl/rng.h"
#include "hybridfl/status_macros.h"

namespace hybridfl {
namespace {

std::vector<size_t> LayerSizes(const ModelSpec& spec) {
  std::vector<size_t> sizes = {spec.input_dim};
  if (spec.kind == ModelKind::kMlp) {
    sizes.insert(sizes.end(), spec.hidden_dims.begin(), spec.hidden_dims.end());
  }
  sizes.push_back(spec.num_classes);
  return sizes;
}

// Activations of every layer for one sample, plus backprop scratch.
class Network {
 public:
  explicit Network(const ModelSpec& spec)
      : spec_(spec), sizes_(LayerSizes(spec)) {
    acts_.resize(sizes_.size());
    deltas_.resize(sizes_.size());
    for (size_t l = 0; l < sizes_.size(); ++l) {
      acts_[l].resize(sizes_[l]);
      deltas_[l].resize(sizes_[l]);
    }
  }

  absl::Span<const double> Run(absl::Span<const double> params,
                               absl::Span<const double> x) {
    std::copy(x.begin(), x.end(), acts_[0].begin());
    size_t offset = 0;
    for (size_t l = 1; l < sizes_.size(); ++l) {
      const size_t in = sizes_[l - 1];
      const size_t out = sizes_[l];
      const double* w = params.data() + offset;
      const double* b = w + in * out;
      const bool hidden = l + 1 < sizes_.size();
      for (size_t o = 0; o < out; ++o) {
        const double* row = w + o * in;
        double z = b[o];
        for (size_t i = 0; i < in; ++i) z += row[i] * acts_[l - 1][i];
        acts_[l][o] = hidden ? std::max(0.0, z) : z;
      }
      offset += in * out + out;
    }
    return acts_.back();
  }

  // Loss of the last Run() against `label`; leaves dLoss/dOutput in the
  // output delta buffer.
  double LossAndOutputGrad(int label) {
    auto& out = acts_.back();
    auto& delta = deltas_.back();
    if (spec_.kind == ModelKind::kLinear) {
      double loss = 0.0;
      for (size_t o = 0; o < out.size(); ++o) {
        double target = out.size() == 1
                            ? static_cast<double>(label)
                            : (static_cast<int>(o) == label ? 1.0 : 0.0);
        delta[o] = out[o] - target;
        loss += 0.5 * delta[o] * delta[o];
      }
      return loss;
    }
    const double max_logit = *std::max_element(out.begin(), out.end());
    double sum = 0.0;
    for (size_t o = 0; o < out.size(); ++o) {
      delta[o] = std::exp(out[o] - max_logit);
      sum += delta[o];
    }
    for (double& d : delta) d /= sum;
    const double loss =
        -(out[static_cast<size_t>(label)] - max_logit - std::log(sum));
    delta[static_cast<size_t>(label)] -= 1.0;
    return loss;
  }

  // Accumulates scale * dLoss/dparams into grad, using the output delta set
  // by LossAndOutputGrad.
  void Backward(absl::Span<const double> params, absl::Span<double> grad,
                double scale) {
    size_t offset = params.size();
    for (size_t l = sizes_.size() - 1; l >= 1; --l) {
      const size_t in = sizes_[l - 1];
      const size_t out = sizes_[l];
      offset -= in * out + out;
      const double* w = params.data() + offset;
      double* gw = grad.data() + offset;
      double* gb = gw + in * out;
      const auto& delta = deltas_[l];
      const auto& prev = acts_[l - 1];
      for (size_t o = 0; o < out; ++o) {
        const double d = scale * delta[o];
        if (d == 0.0) continue;
        double* grow = gw + o * in;
        for (size_t i = 0; i < in; ++i) grow[i] += d * prev[i];
        gb[o] += d;
      }
      if (l == 1) break;
      auto& prev_delta = deltas_[l - 1];
      for (size_t i = 0; i < in; ++i) {
        if (prev[i] <= 0.0) {
          prev_delta[i] = 0.0;
          continue;
        }
        double s = 0.0;
        for (size_t o = 0; o < out; ++o) s += w[o * in + i] * delta[o];
        prev_delta[i] = s;
      }
    }
  }

 private:
  const ModelSpec& spec_;
  std::vector<size_t> sizes_;
  std::vector<std::vector<double>> acts_;
  std::vector<std::vector<double>> deltas_;
};

}  // namespace

absl::string_view ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinear:
      return "linear";
    case ModelKind::kLogistic:
      return "logistic";
    case ModelKind::kMlp:
      return "mlp";
  }
  return "unknown";
}

absl::StatusOr<ModelKind> ParseModelKind(absl::string_view name) {
  if (name == "linear") return ModelKind::kLinear;
  if (name == "logistic") return ModelKind::kLogistic;
  if (name == "mlp") return ModelKind::kMlp;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown model kind '", name, "' (expected linear, logistic or mlp)"));
}

size_t ModelSpec::ParamCount() const {
  std::vector<size_t> sizes = LayerSizes(*this);
  size_t count = 0;
  for (size_t l = 1; l < sizes.size(); ++l) {
    count += sizes[l - 1] * sizes[l] + sizes[l];
  }
  return count;
}

absl::Status ModelSpec::Validate() const {
  if (input_dim == 0) return absl::InvalidArgumentError("input_dim must be >= 1");
  if (num_classes == 0) {
    return absl::InvalidArgumentError("num_classes must be >= 1");
  }
  if (kind != ModelKind::kLinear && num_classes < 2) {
    return absl::InvalidArgumentError(
        "classification models need at least two classes");
  }
  if (kind == ModelKind::kMlp) {
    if (hidden_dims.empty()) {
      return absl::InvalidArgumentError("mlp needs at least one hidden layer");
    }
    for (size_t h : hidden_dims) {
      if (h == 0) return absl::InvalidArgumentError("hidden layer of width 0");
    }
  }
  return absl::OkStatus();
}

absl::Status ModelSpec::CheckData(const Dataset& data) const {
  if (data.num_features != input_dim) {
    return absl::InvalidArgumentError(
        absl::StrCat("model expects ", input_dim, " features, data has ",
                     data.num_features));
  }
  const size_t classes = std::max<size_t>(num_classes, 2);
  for (int label : data.labels) {
    if (label < 0 || static_cast<size_t>(label) >= classes) {
      return absl::InvalidArgumentError(
          absl::StrCat("label ", label, " outside the model's classes"));
    }
  }
  return absl::OkStatus();
}

ParamVector InitParams(const ModelSpec& spec, uint64_t seed) {
  ParamVector params(spec.ParamCount(), 0.0);
  if (spec.kind != ModelKind::kMlp) return params;
  Rng rng(seed);
  std::vector<size_t> sizes = LayerSizes(spec);
  size_t offset = 0;
  for (size_t l = 1; l < sizes.size(); ++l) {
    const size_t in = sizes[l - 1];
    const size_t out = sizes[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    for (size_t i = 0; i < in * out; ++i) {
      params[offset + i] = limit * (2.0 * rng.Uniform01() - 1.0);
    }
    offset += in * out + out;
  }
  return params;
}

absl::StatusOr<double> MeanLoss(const ModelSpec& spec,
                                absl::Span<const double> params,
                                const Dataset& data) {
  RETURN_IF_ERROR(spec.CheckData(data));
  if (data.size() == 0) return absl::InvalidArgumentError("empty dataset");
  Network net(spec);
  double total = 0.0;
  for (size_t i = 0; i < data.size(); ++i) {
    net.Run(params, data.row(i));
    total += net.LossAndOutputGrad(data.labels[i]);
  }
  return total / static_cast<double>(data.size());
}

absl::StatusOr<LocalTrainResult> LocalTrain(const ModelSpec& spec,
                                            absl::Span<const double> params,
                                            const Dataset& data,
                                            const TrainOptions& options,
                                            uint64_t seed) {
  RETURN_IF_ERROR(spec.Validate());
  if (params.size() != spec.ParamCount()) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected ", spec.ParamCount(), " parameters, got ",
                     params.size()));
  }
  RETURN_IF_ERROR(spec.CheckData(data));
  if (data.size() == 0) {
    return absl::InvalidArgumentError("cannot train on an empty dataset");
  }
  if (options.epochs < 1 || options.batch_size == 0) {
    return absl::InvalidArgumentError("epochs and batch size must be >= 1");
  }

  ParamVector w(params.begin(), params.end());
  ParamVector grad(w.size());
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(seed);
  Network net(spec);
  LocalTrainResult result;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.Shuffle(absl::MakeSpan(order));
    for (size_t start = 0; start < order.size(); start += options.batch_size) {
      const size_t end = std::min(order.size(), start + options.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (size_t b = start; b < end; ++b) {
        const size_t i = order[b];
        net.Run(w, data.row(i));
        batch_loss += net.LossAndOutputGrad(data.labels[i]);
        net.Backward(w, absl::MakeSpan(grad), scale);
      }
      if (!std::isfinite(batch_loss)) {
        return absl::InternalError(
            absl::StrCat("local training diverged: non-finite loss in epoch ",
                         epoch));
      }
      for (size_t j = 0; j < w.size(); ++j) {
        w[j] -= options.learning_rate * grad[j];
      }
    }
    if (options.track_loss) {
      ASSIGN_OR_RETURN(double loss, MeanLoss(spec, w, data));
      result.epoch_losses.push_back(loss);
    }
  }
  RETURN_IF_ERROR(CheckFinite(w, "trained parameters"));
  result.update.resize(w.size());
  for (size_t j = 0; j < w.size(); ++j) result.update[j] = w[j] - params[j];
  return result;
}

std::vector<double> Forward(const ModelSpec& spec,
                            absl::Span<const double> params,
                            absl::Span<const double> x) {
  Network net(spec);
  auto out = net.Run(params, x);
  return {out.begin(), out.end()};
}

int PredictClass(const ModelSpec& spec, absl::Span<const double> params,
                 absl::Span<const double> x) {
  std::vector<double> out = Forward(spec, params, x);
  if (out.size() == 1) return static_cast<int>(std::lround(out[0]));
  return static_cast<int>(std::max_element(out.begin(), out.end()) -
                          out.begin());
}

}  // namespace hybridfl
